//! Named solver configurations shared by the runner and the CLI.

use std::fmt;
use std::str::FromStr;

use pwe::corrclust::AffinityMatrix;
use pwe::icm::adaptive_icm;
use pwe::{
    expand_and_explore, solve_multiscale, swap_and_explore, Coarsening, Energy64, ImproveOptions, Labeling,
    MoveOptions, MultiscaleParams, Refiner, Result,
};

use crate::BenchError;

/// ICM sweep cap; in practice it converges well before.
pub const ICM_MAX_SWEEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSolver {
    Icm,
    Swap,
    Expand,
    MsIcm,
    MsSwap,
    MsExpand,
    /// Swap on a pyramid that coarsens labels.
    LabelMsSwap,
}

impl GridSolver {
    pub const ALL: [GridSolver; 7] = [
        GridSolver::Icm,
        GridSolver::Swap,
        GridSolver::Expand,
        GridSolver::MsIcm,
        GridSolver::MsSwap,
        GridSolver::MsExpand,
        GridSolver::LabelMsSwap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GridSolver::Icm => "icm",
            GridSolver::Swap => "swap",
            GridSolver::Expand => "expand",
            GridSolver::MsIcm => "ms-icm",
            GridSolver::MsSwap => "ms-swap",
            GridSolver::MsExpand => "ms-expand",
            GridSolver::LabelMsSwap => "label-ms-swap",
        }
    }

    fn refiner(self, seed: u64) -> Refiner {
        let moves = MoveOptions { improve: ImproveOptions { seed, ..Default::default() }, ..Default::default() };
        match self {
            GridSolver::Icm | GridSolver::MsIcm => Refiner::Icm { max_sweeps: ICM_MAX_SWEEPS },
            GridSolver::Swap | GridSolver::MsSwap | GridSolver::LabelMsSwap => Refiner::Swap(moves),
            GridSolver::Expand | GridSolver::MsExpand => Refiner::Expand(moves),
        }
    }

    /// Pyramid mode of the multiscale variants.
    pub fn coarsening(self) -> Option<Coarsening> {
        match self {
            GridSolver::Icm | GridSolver::Swap | GridSolver::Expand => None,
            GridSolver::MsIcm | GridSolver::MsSwap | GridSolver::MsExpand => Some(Coarsening::Variables),
            GridSolver::LabelMsSwap => Some(Coarsening::Labels),
        }
    }

    /// Single-scale solvers start from the winner-take-all labeling.
    pub fn run(self, energy: &Energy64, seed: u64) -> Result<(Labeling, f64)> {
        let refiner = self.refiner(seed);
        match self.coarsening() {
            None => {
                let s = refiner.refine(energy, &energy.winner_take_all())?;
                Ok((s.labeling, s.energy))
            }
            Some(mode) => {
                let s = solve_multiscale(energy, &refiner, mode, &multiscale_params(seed))?;
                Ok((s.labeling, s.energy))
            }
        }
    }
}

/// Pyramid parameters used by the multiscale solvers for a given seed.
pub fn multiscale_params(seed: u64) -> MultiscaleParams {
    MultiscaleParams { seed, ..Default::default() }
}

impl fmt::Display for GridSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GridSolver {
    type Err = BenchError;
    fn from_str(s: &str) -> std::result::Result<Self, BenchError> {
        GridSolver::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| BenchError::UnknownSolver(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcSolver {
    AdaptiveIcm,
    SwapExplore,
    ExpandExplore,
}

impl CcSolver {
    pub const ALL: [CcSolver; 3] = [CcSolver::AdaptiveIcm, CcSolver::SwapExplore, CcSolver::ExpandExplore];

    pub fn name(self) -> &'static str {
        match self {
            CcSolver::AdaptiveIcm => "adaptive-icm",
            CcSolver::SwapExplore => "swap-explore",
            CcSolver::ExpandExplore => "expand-explore",
        }
    }

    /// Returns the compacted partition and its Potts cost.
    pub fn run(self, w: &AffinityMatrix<f64>, seed: u64) -> Result<(Labeling, f64)> {
        let moves = MoveOptions { improve: ImproveOptions { seed, ..Default::default() }, ..Default::default() };
        let s = match self {
            CcSolver::AdaptiveIcm => {
                let singletons = Labeling::new((0..w.num_vars()).collect());
                adaptive_icm(w, &singletons, ICM_MAX_SWEEPS)?
            }
            CcSolver::SwapExplore => swap_and_explore(w, None, moves)?,
            CcSolver::ExpandExplore => expand_and_explore(w, None, moves)?,
        };
        Ok((s.labeling, s.energy))
    }
}

impl fmt::Display for CcSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CcSolver {
    type Err = BenchError;
    fn from_str(s: &str) -> std::result::Result<Self, BenchError> {
        CcSolver::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| BenchError::UnknownSolver(s.into()))
    }
}
