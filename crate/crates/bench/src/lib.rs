//! Synthetic instance families, exhaustive oracles and a benchmark runner
//! for the `pwe` solvers.

pub mod gen;
pub mod oracle;
pub mod solvers;
pub mod suite;

pub use gen::{gen_cc_complete, gen_cc_matrix, gen_grid_energy, CcParams};
pub use oracle::{brute_force, brute_force_binary, brute_force_partitions};
pub use solvers::{CcSolver, GridSolver};
pub use suite::{bench_run, Report, SuiteConfig};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] pwe::Error),
    #[error("unknown solver {0:?}")]
    UnknownSolver(String),
    #[error("bad configuration: {0}")]
    Config(String),
}
