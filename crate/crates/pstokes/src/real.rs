//! Scalar abstraction for the field algebra.
//!
//! Everything that touches grid data is generic over [`Real`], which bundles
//! the float traits the pointwise algebra needs with [`rustfft::FftNum`] so
//! the same code drives f32 and f64 transforms. Configuration values (grid
//! geometry, exponents, tolerances) stay `f64` and are converted at the call
//! boundary with [`real`].

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};
use rustfft::FftNum;

/// Scalar type of field values.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssignOps + FftNum + Default
{
    /// Shorthand for `from_f64` on values known to be representable.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// Lossy view as f64, for diagnostics and reports.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert a configuration value into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::of(x)
}
