//! Numerical verification of Gustafson's u(N) Mellin-Barnes integral
//! identities.
//!
//! The crate evaluates six families of multidimensional Mellin-Barnes
//! integrals (the Gustafson generalizations of the two Barnes lemmas, the
//! auxiliary integrals R+/R-, the reduced integral obtained from the residue
//! of R+/R- at nu = 0, and a BC-type integral with Gamma(alpha_k +- z_j)
//! pairings) and checks them against their closed-form gamma-product values
//! along several independent routes:
//!
//! * straight-contour quadrature ([`quadrature`]), in one to three
//!   dimensions, with explicit handling of the power-like tails of R+/R-;
//! * the left-half-plane residue series and its embedded Milne-type sum
//!   ([`series`]);
//! * a determinant representation built from one-dimensional moment
//!   integrals of the Q+/Q- kernels ([`determinant`]), including numeric
//!   extraction of the residue at nu = 0.
//!
//! The numeric kernels are generic over the floating-point scalar (see
//! [`scalar::Real`]); `f64` is the precision the library contract is stated
//! for, and the [`ComplexValue`] alias at the crate root is the concrete
//! scalar used by the verification harness and the CLI.

// negated comparisons are deliberate: a NaN must fall through to the
// rejecting branch; index loops over the 3x3 adjugates read better as written
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod determinant;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod scalar;
pub mod series;
pub mod special_functions;
pub mod verify;

pub use error::Error;
pub use scalar::Real;

/// The universal scalar of the verification harness: a complex double.
pub type ComplexValue = num_complex::Complex<f64>;

/// Single-precision complex, available through the same generic kernels.
pub type ComplexValue32 = num_complex::Complex<f32>;

/// Convenience constructor for [`ComplexValue`].
#[inline]
pub fn c64(re: f64, im: f64) -> ComplexValue {
    num_complex::Complex::new(re, im)
}
