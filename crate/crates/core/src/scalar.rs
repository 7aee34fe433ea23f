//! Floating-point scalar abstraction for the numeric kernels.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar types the numeric kernels can run on: `f32` or `f64`.
///
/// The stated accuracy contracts hold for `f64`; an `f32` instantiation
/// compiles and runs but saturates at single precision.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` constant.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    /// Lossy view as `f64`, for diagnostics.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a generic scalar.
pub type C<T> = Complex<T>;

/// Complex constant from `f64` parts.
#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::of(re), T::of(im))
}

/// Complex zero.
#[inline]
pub fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// Complex one.
#[inline]
pub fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// The imaginary unit.
#[inline]
pub fn ci<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}
