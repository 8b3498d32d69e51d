use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar used for every cost, weight and interpolation coefficient.
///
/// Implemented for `f32` and `f64`. The crate root exposes `f64` aliases for
/// the common types; `f64` is what the CLI, oracles and generators use.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute slack for inequality tests (submodularity, metric checks, row sums).
    const TOLERANCE: Self;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to every Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance scaled to the magnitude of `scale`, never below [`Real::TOLERANCE`].
    fn slack(scale: Self) -> Self {
        Self::TOLERANCE * (Self::one() + scale.abs())
    }
}

impl Real for f64 {
    const TOLERANCE: f64 = 1e-12;
}

impl Real for f32 {
    const TOLERANCE: f32 = 1e-5;
}
