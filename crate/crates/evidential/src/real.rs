//! Scalar abstraction for the math layer.
//!
//! Distribution math (special functions, NIG operations, losses) is generic
//! over [`Real`] so it runs in `f32` or `f64`. The training stack is pinned
//! to `f64` and does not use this trait.

use std::fmt::{Debug, Display};

use num_traits::float::FloatConst;
use num_traits::Float;

/// Floating-point scalar usable in the distribution math: `f32` or `f64`.
pub trait Real: Float + FloatConst + Debug + Display + 'static {}

impl<T> Real for T where T: Float + FloatConst + Debug + Display + 'static {}

/// Converts an `f64` constant into `T`, panicking only if `T` cannot
/// represent ordinary finite constants (never the case for `f32`/`f64`).
#[inline]
pub fn from_f64<T: Real>(x: f64) -> T {
    T::from(x).expect("finite f64 constant must be representable")
}
