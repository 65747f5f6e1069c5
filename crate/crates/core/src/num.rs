//! Scalar abstraction for the floating point parts of the crate.

use std::fmt::{Debug, Display};

/// Real scalar used by the analytic formulas, fitting and statistics.
///
/// Implemented for `f32` and `f64`. The GF(2) engine never touches it.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize is representable")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }
}

impl Real for f32 {}
impl Real for f64 {}
