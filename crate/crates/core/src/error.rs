//! Error type shared by the numeric modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma pole: z = {re} + {im}i is within {radius:e} of the non-positive integer {pole}")]
    GammaPole { re: f64, im: f64, pole: i64, radius: f64 },

    #[error("trigonometric pole: z = {re} + {im}i is within {radius:e} of the half-integer {pole}")]
    TrigPole { re: f64, im: f64, pole: f64, radius: f64 },

    #[error("gamma overflow: Re log Gamma = {log_magnitude} exceeds the floating range")]
    Overflow { log_magnitude: f64 },

    #[error("parameter arity violation for {family}: {detail}")]
    Arity { family: &'static str, detail: String },

    #[error("operation requires an R+/R- parameter set, got {family}")]
    WrongFamily { family: &'static str },

    #[error("closed form has a pole in the factor {factor}")]
    RhsPole { factor: String },

    #[error("integrand dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("non-finite integrand value at node z = {re} + {im}i")]
    NonFiniteIntegrand { re: f64, im: f64 },

    #[error("invalid contour: {detail}")]
    InvalidContour { detail: String },

    #[error("series does not converge: Re(nu) = {nu_re} but the R+/R- integrals converge only for Re(nu) > 0")]
    NonConvergent { nu_re: f64 },

    #[error("degenerate beta spacing: {detail}")]
    DegenerateBetaSpacing { detail: String },

    #[error("reduction at N = 1 yields the zero-dimensional integral (value 1 by convention)")]
    ZeroDimensionalReduction,

    #[error("residue fit is ill-conditioned (condition number {condition:e})")]
    IllConditionedFit { condition: f64 },

    #[error("invalid epsilon list: {detail}")]
    InvalidEpsilons { detail: String },

    #[error("parameter sampling failed after {attempts} attempts")]
    SamplingFailed { attempts: usize },
}
