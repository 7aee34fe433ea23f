//! The catalog of Mellin-Barnes integral families: parameter sets, validity
//! and convergence checks, integrand evaluation and closed-form right-hand
//! sides.
//!
//! A [`MBParameterSet`] fully determines an integral instance. Derived
//! quantities (the parameter sums, the convergence parameter `nu`, the
//! second-integral parameter `gamma`) are always computed from the lists and
//! never stored, which removes a whole class of inconsistent-parameter bugs.
//!
//! Integrand values are assembled in log space: the largest instances
//! multiply (N+1)(N+2) gamma factors and would overflow long before the
//! product itself leaves the floating range. Cross factors
//! `1/(Gamma(z_k - z_j) Gamma(z_j - z_k))` are evaluated through the
//! reflection identity `-w sin(pi w)/pi`, which is entire and makes the
//! coincident-node zeros exact instead of a 0/0 pole fight.

use crate::error::Error;
use crate::scalar::{c, ci, czero, Real, C};
use crate::special_functions::{factorial, is_at_gamma_pole, log_gamma, log_reflection_pair};
use serde::{Deserialize, Serialize};

/// The six integral families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MBFamily {
    GustafsonFirst,
    GustafsonSecond,
    RPlus,
    RMinus,
    TReduced,
    ThreeStars,
}

impl MBFamily {
    pub const ALL: [MBFamily; 6] = [
        MBFamily::GustafsonFirst,
        MBFamily::GustafsonSecond,
        MBFamily::RPlus,
        MBFamily::RMinus,
        MBFamily::TReduced,
        MBFamily::ThreeStars,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MBFamily::GustafsonFirst => "GustafsonFirst",
            MBFamily::GustafsonSecond => "GustafsonSecond",
            MBFamily::RPlus => "RPlus",
            MBFamily::RMinus => "RMinus",
            MBFamily::TReduced => "TReduced",
            MBFamily::ThreeStars => "ThreeStars",
        }
    }

    /// Expected (alphas, betas, has_a) for integration dimension `n`.
    pub fn arity(self, n: usize) -> (usize, usize, bool) {
        match self {
            MBFamily::GustafsonFirst => (n + 1, n + 1, false),
            MBFamily::GustafsonSecond => (n + 2, n + 1, false),
            MBFamily::RPlus | MBFamily::RMinus => (n + 1, n, true),
            MBFamily::TReduced => (n + 2, n + 1, false),
            MBFamily::ThreeStars => (2 * n + 1, 1, false),
        }
    }

    /// The sign carried by the exponential factor of R+/R-: `+1` for RPlus,
    /// `-1` for RMinus, `None` for the other families.
    pub fn exponential_sign(self) -> Option<f64> {
        match self {
            MBFamily::RPlus => Some(1.0),
            MBFamily::RMinus => Some(-1.0),
            _ => None,
        }
    }

    /// Per-variable contour measure: `1/(2 pi i)` everywhere except the
    /// three-stars family, which uses `1/(4 pi i)`.
    pub fn measure(self) -> crate::quadrature::Measure {
        match self {
            MBFamily::ThreeStars => crate::quadrature::Measure::Half,
            _ => crate::quadrature::Measure::Standard,
        }
    }
}

impl std::fmt::Display for MBFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One fully-specified integral instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MBParameterSet<T: Real> {
    pub family: MBFamily,
    /// Integration dimension.
    pub n: usize,
    pub alphas: Vec<C<T>>,
    pub betas: Vec<C<T>>,
    pub a: Option<C<T>>,
}

impl<T: Real> MBParameterSet<T> {
    /// Builds a parameter set, enforcing the family arity invariants.
    pub fn new(
        family: MBFamily,
        n: usize,
        alphas: Vec<C<T>>,
        betas: Vec<C<T>>,
        a: Option<C<T>>,
    ) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::Arity {
                family: family.name(),
                detail: "integration dimension N must be positive".into(),
            });
        }
        let (na, nb, has_a) = family.arity(n);
        if alphas.len() != na || betas.len() != nb {
            return Err(Error::Arity {
                family: family.name(),
                detail: format!(
                    "N = {n} requires {na} alphas and {nb} betas, got {} and {}",
                    alphas.len(),
                    betas.len()
                ),
            });
        }
        if has_a != a.is_some() {
            return Err(Error::Arity {
                family: family.name(),
                detail: if has_a {
                    "parameter a is required".into()
                } else {
                    "parameter a must be absent (it is derived)".into()
                },
            });
        }
        Ok(Self { family, n, alphas, betas, a })
    }

    pub fn alpha_sum(&self) -> C<T> {
        self.alphas.iter().fold(czero(), |s, &a| s + a)
    }

    pub fn beta_sum(&self) -> C<T> {
        self.betas.iter().fold(czero(), |s, &b| s + b)
    }
}

/// The parameter sums and the derived quantities that exist for the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities<T: Real> {
    /// Sum of the alpha list.
    pub alpha_sum: C<T>,
    /// Sum of the beta list.
    pub beta_sum: C<T>,
    /// `gamma = alpha_sum + beta_sum` for GustafsonSecond / TReduced.
    pub gamma_param: Option<C<T>>,
    /// `nu = a - alpha_sum - beta_sum` for RPlus / RMinus.
    pub nu: Option<C<T>>,
}

pub fn derived_quantities<T: Real>(p: &MBParameterSet<T>) -> DerivedQuantities<T> {
    let alpha_sum = p.alpha_sum();
    let beta_sum = p.beta_sum();
    let gamma_param = match p.family {
        MBFamily::GustafsonSecond | MBFamily::TReduced => Some(alpha_sum + beta_sum),
        _ => None,
    };
    let nu = match p.family {
        MBFamily::RPlus | MBFamily::RMinus => p.a.map(|a| a - alpha_sum - beta_sum),
        _ => None,
    };
    DerivedQuantities { alpha_sum, beta_sum, gamma_param, nu }
}

/// Outcome of the contour / convergence checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub contour_feasible: bool,
    pub converges: bool,
    pub messages: Vec<String>,
}

/// Checks that the straight contour `Re z = c` separates the right pole
/// ladders `alpha_n + k` from the left ladders `-beta_m - k`, and that the
/// instance converges (`Re nu > 0` for R+/R-; the remaining families
/// converge for all parameter values).
pub fn validate<T: Real>(p: &MBParameterSet<T>, shift: T) -> ValidationReport {
    let mut messages = Vec::new();
    let c_f = shift.as_f64();

    let contour_feasible = match p.family {
        MBFamily::ThreeStars => {
            // Gamma(alpha_k +- z_j) puts ladders on both sides of the
            // symmetric contour.
            let min_alpha = p.alphas.iter().map(|a| a.re.as_f64()).fold(f64::INFINITY, f64::min);
            let ok = min_alpha > c_f.abs();
            if !ok {
                messages.push(format!(
                    "contour Re z = {c_f} does not separate the pole ladders: min Re alpha = {min_alpha} <= |c|"
                ));
            }
            ok
        }
        _ => {
            let min_alpha = p.alphas.iter().map(|a| a.re.as_f64()).fold(f64::INFINITY, f64::min);
            let max_neg_beta = p.betas.iter().map(|b| -b.re.as_f64()).fold(f64::NEG_INFINITY, f64::max);
            let ok = min_alpha > c_f && c_f > max_neg_beta;
            if !ok {
                messages.push(format!(
                    "contour Re z = {c_f} does not separate the pole ladders: need max(-Re beta) = {max_neg_beta} < c < min Re alpha = {min_alpha}"
                ));
            }
            ok
        }
    };

    let converges = match p.family {
        MBFamily::RPlus | MBFamily::RMinus => {
            let nu = derived_quantities(p).nu.expect("R family has a");
            let ok = nu.re > T::zero();
            if !ok {
                messages.push(format!(
                    "the R+/R- integrals converge only for Re(nu) > 0; Re(nu) = {}",
                    nu.re.as_f64()
                ));
            }
            ok
        }
        _ => true,
    };

    ValidationReport {
        ok: contour_feasible && converges,
        contour_feasible,
        converges,
        messages,
    }
}

/// Log of the single-variable factor of the integrand (everything except the
/// cross factors), including the exponential phase for R+/R-.
pub(crate) fn per_variable_log<T: Real>(p: &MBParameterSet<T>, z: C<T>) -> Result<C<T>, Error> {
    let mut acc = czero::<T>();
    match p.family {
        MBFamily::GustafsonFirst => {
            for (&al, &be) in p.alphas.iter().zip(p.betas.iter()) {
                acc = acc + log_gamma(al - z)? + log_gamma(be + z)?;
            }
        }
        MBFamily::GustafsonSecond | MBFamily::TReduced => {
            let gamma_param = derived_quantities(p).gamma_param.expect("derived gamma");
            for &al in &p.alphas {
                acc = acc + log_gamma(al - z)?;
            }
            for &be in &p.betas {
                acc = acc + log_gamma(be + z)?;
            }
            acc = acc - log_gamma(gamma_param - z)?;
        }
        MBFamily::RPlus | MBFamily::RMinus => {
            let sign = T::of(p.family.exponential_sign().expect("R family"));
            let a = p.a.expect("R family has a");
            acc = acc + ci::<T>() * T::PI() * sign * z;
            for &al in &p.alphas {
                acc = acc + log_gamma(al - z)?;
            }
            for &be in &p.betas {
                acc = acc + log_gamma(be + z)?;
            }
            acc = acc - log_gamma(a - z)?;
        }
        MBFamily::ThreeStars => {
            let beta = p.betas[0];
            for &al in &p.alphas {
                acc = acc + log_gamma(al + z)? + log_gamma(al - z)?;
            }
            acc = acc - log_gamma(beta + z)? - log_gamma(beta - z)?;
            // 1/(Gamma(2z) Gamma(-2z)) = -2z sin(2 pi z)/pi
            match log_reflection_pair(z * T::of(2.0)) {
                Some(l) => acc = acc + l,
                None => return Ok(c::<T>(f64::NEG_INFINITY, 0.0)),
            }
        }
    }
    Ok(acc)
}

/// Log of the cross factor coupling `z_k` and `z_j`; `None` marks an exact
/// structural zero of the integrand.
pub(crate) fn pair_log<T: Real>(p: &MBParameterSet<T>, zk: C<T>, zj: C<T>) -> Option<C<T>> {
    match p.family {
        MBFamily::ThreeStars => {
            // Gamma(+-z_k +- z_j) expands into two reflection pairs.
            let plus = log_reflection_pair(zk + zj)?;
            let minus = log_reflection_pair(zk - zj)?;
            Some(plus + minus)
        }
        _ => log_reflection_pair(zk - zj),
    }
}

/// Evaluates the full integrand of the family at a point of the product
/// contour. The per-variable contour measure is excluded: the quadrature
/// engine owns it.
pub fn integrand<T: Real>(p: &MBParameterSet<T>, z: &[C<T>]) -> Result<C<T>, Error> {
    if z.len() != p.n {
        return Err(Error::Arity {
            family: p.family.name(),
            detail: format!("integrand needs {} variables, got {}", p.n, z.len()),
        });
    }
    let mut acc = czero::<T>();
    for &zj in z {
        let term = per_variable_log(p, zj)?;
        if term.re == T::neg_infinity() {
            return Ok(czero());
        }
        acc = acc + term;
    }
    for k in 0..z.len() {
        for j in (k + 1)..z.len() {
            match pair_log(p, z[k], z[j]) {
                Some(l) => acc = acc + l,
                None => return Ok(czero()),
            }
        }
    }
    Ok(acc.exp())
}

fn log_gamma_rhs<T: Real>(w: C<T>, factor: &str) -> Result<C<T>, Error> {
    log_gamma(w).map_err(|_| Error::RhsPole { factor: format!("Gamma({factor})") })
}

/// The closed-form right-hand side of the family's identity.
///
/// A pole in a numerator gamma is an error (the identity value is infinite
/// there); a pole in a denominator gamma makes the value exactly zero.
pub fn closed_form_rhs<T: Real>(p: &MBParameterSet<T>) -> Result<C<T>, Error> {
    let d = derived_quantities(p);
    let nfac = c::<T>(0.0, 0.0) + factorial::<T>(p.n);
    match p.family {
        MBFamily::GustafsonFirst => {
            let mut acc = nfac.ln();
            for (ki, &al) in p.alphas.iter().enumerate() {
                for (ji, &be) in p.betas.iter().enumerate() {
                    acc = acc + log_gamma_rhs(al + be, &format!("alpha_{} + beta_{}", ki + 1, ji + 1))?;
                }
            }
            let total = d.alpha_sum + d.beta_sum;
            if is_at_gamma_pole(total) {
                return Ok(czero());
            }
            acc = acc - log_gamma(total)?;
            Ok(acc.exp())
        }
        MBFamily::GustafsonSecond | MBFamily::TReduced => {
            let gamma_param = d.gamma_param.expect("derived gamma");
            let mut acc = nfac.ln();
            for (ki, &al) in p.alphas.iter().enumerate() {
                for (ji, &be) in p.betas.iter().enumerate() {
                    acc = acc + log_gamma_rhs(al + be, &format!("alpha_{} + beta_{}", ki + 1, ji + 1))?;
                }
            }
            for &al in &p.alphas {
                if is_at_gamma_pole(gamma_param - al) {
                    return Ok(czero());
                }
                acc = acc - log_gamma(gamma_param - al)?;
            }
            Ok(acc.exp())
        }
        MBFamily::RPlus | MBFamily::RMinus => {
            let a = p.a.expect("R family has a");
            let nu = d.nu.expect("derived nu");
            let sign = T::of(p.family.exponential_sign().expect("R family"));
            let mut acc = nfac.ln() - ci::<T>() * T::PI() * sign * d.beta_sum;
            acc = acc + log_gamma_rhs(nu, "nu")?;
            for (ji, &al) in p.alphas.iter().enumerate() {
                for (ki, &be) in p.betas.iter().enumerate() {
                    acc = acc + log_gamma_rhs(al + be, &format!("alpha_{} + beta_{}", ji + 1, ki + 1))?;
                }
            }
            for &al in &p.alphas {
                if is_at_gamma_pole(a - al) {
                    return Ok(czero());
                }
                acc = acc - log_gamma(a - al)?;
            }
            Ok(acc.exp())
        }
        MBFamily::ThreeStars => {
            let beta = p.betas[0];
            let mut acc = nfac.ln();
            acc = acc + log_gamma_rhs(beta - d.alpha_sum, "beta - A")?;
            for k in 0..p.alphas.len() {
                for j in (k + 1)..p.alphas.len() {
                    acc = acc + log_gamma_rhs(
                        p.alphas[k] + p.alphas[j],
                        &format!("alpha_{} + alpha_{}", k + 1, j + 1),
                    )?;
                }
            }
            for &al in &p.alphas {
                if is_at_gamma_pole(beta - al) {
                    return Ok(czero());
                }
                acc = acc - log_gamma(beta - al)?;
            }
            Ok(acc.exp())
        }
    }
}

/// Bookkeeping for the residue-at-nu=0 reduction: an R+/R- instance of
/// dimension N maps to the reduced integral of dimension N-1 with the same
/// parameter lists and `a` pinned to `alpha_sum + beta_sum` (derived, never
/// stored).
pub fn reduction_parameters<T: Real>(p: &MBParameterSet<T>) -> Result<MBParameterSet<T>, Error> {
    match p.family {
        MBFamily::RPlus | MBFamily::RMinus => {}
        other => return Err(Error::WrongFamily { family: other.name() }),
    }
    if p.n < 2 {
        return Err(Error::ZeroDimensionalReduction);
    }
    MBParameterSet::new(
        MBFamily::TReduced,
        p.n - 1,
        p.alphas.clone(),
        p.betas.clone(),
        None,
    )
}

/// `e^{-+ i pi B}`: the phase prefactor of the R+/R- closed form and residue
/// series (upper sign for RPlus).
pub fn r_phase_prefactor<T: Real>(p: &MBParameterSet<T>) -> C<T> {
    let sign = T::of(p.family.exponential_sign().unwrap_or(1.0));
    (-ci::<T>() * T::PI() * sign * p.beta_sum()).exp()
}

// JSON schema: {"family": str, "N": int, "alphas": [[re,im],..],
// "betas": [[re,im],..], "a": [re,im] | null}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    family: MBFamily,
    #[serde(rename = "N")]
    n: usize,
    alphas: Vec<[f64; 2]>,
    betas: Vec<[f64; 2]>,
    a: Option<[f64; 2]>,
}

impl Serialize for MBParameterSet<f64> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = ParamsRepr {
            family: self.family,
            n: self.n,
            alphas: self.alphas.iter().map(|z| [z.re, z.im]).collect(),
            betas: self.betas.iter().map(|z| [z.re, z.im]).collect(),
            a: self.a.map(|z| [z.re, z.im]),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MBParameterSet<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ParamsRepr::deserialize(deserializer)?;
        MBParameterSet::new(
            repr.family,
            repr.n,
            repr.alphas.iter().map(|&[re, im]| crate::c64(re, im)).collect(),
            repr.betas.iter().map(|&[re, im]| crate::c64(re, im)).collect(),
            repr.a.map(|[re, im]| crate::c64(re, im)),
        )
        .map_err(serde::de::Error::custom)
    }
}
