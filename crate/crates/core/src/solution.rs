use crate::energy::Labeling;

/// Result of a descent solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub labeling: Labeling,
    pub energy: T,
    /// Energy before the first step followed by the energy after every
    /// accepted step (large moves) or every sweep (ICM variants).
    pub trace: Vec<T>,
    pub stats: MoveStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveStats {
    pub sweeps: usize,
    pub accepted: usize,
    /// Binary sub-problems that were submodular and solved by min-cut.
    pub exact_steps: usize,
    /// Binary sub-problems handed to QPBOI.
    pub improve_steps: usize,
}

impl<T: Copy + PartialOrd> Solution<T> {
    /// True when the recorded trace never goes up.
    pub fn is_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1] <= w[0])
    }
}
