//! Energy pyramids: correlation estimates, interpolation, coarsening by
//! variables or labels, and coarse-to-fine optimization.

mod coarsen;
mod correlation;
mod interpolation;
mod pyramid;

pub use coarsen::{coarsen_labels, coarsen_variables, galerkin_product, GalerkinProduct};
pub use correlation::{estimate_correlations, label_correlations, label_interpolation, EstimateOptions};
pub use interpolation::{build_interpolation, select_coarse, CoarseSet, Correlations, InterpolationMatrix};
pub use pyramid::{solve_multiscale, Coarsening, EnergyPyramid, MultiscaleParams, MultiscaleSolution, Refiner};
