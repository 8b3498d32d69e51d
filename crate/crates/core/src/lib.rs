//! Minimization of discrete pairwise energies.
//!
//! Energies take the form `sum_i D[i, l_i] + sum_{(i,j)} w_ij V[l_i, l_j]`
//! over labelings of the variables of a sparse graph. The crate offers
//! exact min-cut for submodular binary energies, QPBO with the improve
//! extension for non-submodular ones, ICM, alpha-beta swap and alpha
//! expansion, exploration variants for correlation clustering, and a
//! multiscale energy pyramid that coarsens variables or labels.
//!
//! All numerical types are generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`.

pub mod binary;
pub mod corrclust;
pub mod energy;
pub mod error;
pub mod format;
pub mod icm;
pub mod maxflow;
pub mod mincut;
pub mod moves;
pub mod multiscale;
pub mod qpbo;
pub mod rng;
pub mod scalar;
pub mod solution;

pub use binary::{BinaryEdge, BinaryEnergy};
pub use corrclust::AffinityMatrix;
pub use energy::{AssignmentMatrix, Classification, Edge, Energy, Labeling, Neighbor};
pub use error::{Error, Result};
pub use icm::{adaptive_icm, icm, SweepOrder};
pub use mincut::{build_graph, min_cut, FlowGraph};
pub use moves::{alpha_beta_swap, alpha_expansion, expand_and_explore, swap_and_explore, MoveOptions};
pub use multiscale::{solve_multiscale, Coarsening, EnergyPyramid, InterpolationMatrix, MultiscaleParams, Refiner};
pub use qpbo::{qpbo_solve, qpboi_improve, ImproveOptions, PartialLabeling};
pub use scalar::Real;
pub use solution::{MoveStats, Solution};

pub type Energy64 = Energy<f64>;
pub type BinaryEnergy64 = BinaryEnergy<f64>;
pub type AssignmentMatrix64 = AssignmentMatrix<f64>;
pub type AffinityMatrix64 = AffinityMatrix<f64>;
pub type Solution64 = Solution<f64>;
pub type InterpolationMatrix64 = InterpolationMatrix<f64>;
