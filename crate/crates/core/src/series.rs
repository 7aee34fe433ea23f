//! The left-half-plane residue series for R+/R- and the embedded Milne-type
//! sum: the quadrature-independent second route to the same numbers.
//!
//! The bare sum runs over multi-indices `n in [0, n_max]^N`:
//!
//! ```text
//! sum_n  prod_{k<j} (beta_k + n_k - beta_j - n_j)/(beta_k - beta_j)
//!        prod_{j<=N} prod_{k<=N+1} (alpha_k + beta_j)_{n_j} / (1 - bhat_k + beta_j)_{n_j}
//! ```
//!
//! with `bhat` the beta list extended by `beta_{N+1} = 1 - a`. Terms are
//! produced by running Pochhammer recurrences (term(n+1) from term(n)), not
//! fresh gamma calls. Terms decay like `n^{-1 - Re nu}` per coordinate, so
//! partial sums converge slowly; `tail_estimate` extrapolates the fitted
//! power decay of the shell sums (terms grouped by max coordinate) beyond
//! the truncation, which keeps the estimate honest for power-law tails where
//! plain partial-sum differencing undercounts by a factor ~ n_max / (2 nu).

use crate::error::Error;
use crate::model::{derived_quantities, r_phase_prefactor, MBFamily, MBParameterSet};
use crate::scalar::{cone, czero, Real, C};
use crate::special_functions::{factorial, log_gamma};

/// Truncated series value with an extrapolated tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult<T: Real> {
    /// The truncated partial sum.
    pub value: C<T>,
    pub terms_used: u64,
    pub tail_estimate: T,
}

fn require_r_family<T: Real>(p: &MBParameterSet<T>) -> Result<(), Error> {
    match p.family {
        MBFamily::RPlus | MBFamily::RMinus => Ok(()),
        other => Err(Error::WrongFamily { family: other.name() }),
    }
}

/// Shared preconditions: convergent instance and generic beta spacing.
///
/// Integer spacing among the N real betas zeroes a Vandermonde denominator
/// or a `(1 - beta_k + beta_j)_{n_j}` Pochhammer. The derived
/// `beta_{N+1} = 1 - a` enters the denominators only through
/// `(a + beta_j)_{n_j}`, so for it the dangerous set is the non-positive
/// integers of `a + beta_j`.
fn check_preconditions<T: Real>(p: &MBParameterSet<T>) -> Result<(), Error> {
    require_r_family(p)?;
    let nu = derived_quantities(p).nu.expect("R family has a");
    if !(nu.re > T::zero()) {
        return Err(Error::NonConvergent { nu_re: nu.re.as_f64() });
    }
    let a = p.a.expect("R family has a");
    let margin = T::of(0.05);
    for k in 0..p.betas.len() {
        for j in (k + 1)..p.betas.len() {
            let d = p.betas[k] - p.betas[j];
            let nearest = d.re.round();
            let dist = ((d.re - nearest) * (d.re - nearest) + d.im * d.im).sqrt();
            if dist < margin {
                return Err(Error::DegenerateBetaSpacing {
                    detail: format!(
                        "beta_{} - beta_{} = {} + {}i is within 0.05 of the integer {}",
                        k + 1,
                        j + 1,
                        d.re.as_f64(),
                        d.im.as_f64(),
                        nearest.as_f64(),
                    ),
                });
            }
        }
    }
    for (j, &bj) in p.betas.iter().enumerate() {
        let w = a + bj;
        let nearest = w.re.round();
        if nearest <= T::of(0.5) {
            let dist = ((w.re - nearest) * (w.re - nearest) + w.im * w.im).sqrt();
            if dist < margin {
                return Err(Error::DegenerateBetaSpacing {
                    detail: format!(
                        "a + beta_{} = {} + {}i is within 0.05 of the non-positive integer {}",
                        j + 1,
                        w.re.as_f64(),
                        w.im.as_f64(),
                        nearest.as_f64(),
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Iterates multi-indices of `[0, n_max]^n` in lexicographic order; returns
/// false when exhausted.
fn advance(idx: &mut [usize], n_max: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        if *slot < n_max {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

/// Extrapolated bound on the dropped tail from the shell sums
/// `sigma_s = sum over terms with max coordinate s`.
fn shell_tail_estimate<T: Real>(shells: &[C<T>]) -> T {
    let n = shells.len();
    if n < 8 {
        return T::infinity();
    }
    // least-squares slope of ln |sigma_s| against ln s over the last shells
    let lo = n - 6;
    let mut su = T::zero();
    let mut sy = T::zero();
    let mut suu = T::zero();
    let mut suy = T::zero();
    let mut count = T::zero();
    for s in lo..n {
        let mag = shells[s].norm();
        if mag <= T::zero() {
            continue;
        }
        let x = T::of(s as f64).ln();
        let y = mag.ln();
        su = su + x;
        sy = sy + y;
        suu = suu + x * x;
        suy = suy + x * y;
        count = count + T::one();
    }
    if count < T::of(2.0) {
        return T::zero();
    }
    let denom = count * suu - su * su;
    if denom == T::zero() {
        return T::infinity();
    }
    let p_hat = -(count * suy - su * sy) / denom;
    let last = shells[n - 1].norm();
    if !(p_hat > T::of(1.02)) {
        return T::infinity();
    }
    // sum_{s > n-1} C s^{-p} <= |sigma_{n-1}| (n-1) / (p-1), with headroom
    last * T::of((n - 1) as f64) / (p_hat - T::one()) * T::of(1.5)
}

/// The bare Milne-type sum, truncated at `n_max` per coordinate.
pub fn milne_sum<T: Real>(p: &MBParameterSet<T>, n_max: usize) -> Result<SeriesResult<T>, Error> {
    check_preconditions(p)?;
    let n = p.n;
    let a = p.a.expect("R family has a");
    let mut bhat = p.betas.clone();
    bhat.push(cone::<T>() - a);

    // per-coordinate cumulative Pochhammer-ratio factors:
    // t_j(m+1) = t_j(m) * prod_k (alpha_k + beta_j + m) / (1 - bhat_k + beta_j + m)
    let mut coord_terms: Vec<Vec<C<T>>> = Vec::with_capacity(n);
    for j in 0..n {
        let bj = p.betas[j];
        let mut col = Vec::with_capacity(n_max + 1);
        let mut t = cone::<T>();
        col.push(t);
        for m in 0..n_max {
            let mf = T::of(m as f64);
            let mut num = cone::<T>();
            for &al in &p.alphas {
                num = num * (al + bj + mf);
            }
            let mut den = cone::<T>();
            for &bk in &bhat {
                den = den * (cone::<T>() - bk + bj + mf);
            }
            t = t * num / den;
            col.push(t);
        }
        coord_terms.push(col);
    }

    // shell accumulation by max coordinate
    let mut shells = vec![czero::<T>(); n_max + 1];
    let mut idx = vec![0usize; n];
    let mut terms: u64 = 0;
    loop {
        let mut term = cone::<T>();
        for j in 0..n {
            term = term * coord_terms[j][idx[j]];
        }
        for k in 0..n {
            for j in (k + 1)..n {
                let bk = p.betas[k] + T::of(idx[k] as f64);
                let bj = p.betas[j] + T::of(idx[j] as f64);
                term = term * (bk - bj) / (p.betas[k] - p.betas[j]);
            }
        }
        let shell = idx.iter().copied().max().unwrap_or(0);
        shells[shell] = shells[shell] + term;
        terms += 1;
        if !advance(&mut idx, n_max) {
            break;
        }
    }

    let value = crate::quadrature::pairwise_sum(&shells);
    let tail_estimate = shell_tail_estimate(&shells);
    Ok(SeriesResult { value, terms_used: terms, tail_estimate })
}

/// Log of the residue-series prefactor
/// `N! e^{-+ i pi B} prod_{j<=N} prod_{k<=N+1} Gamma(alpha_k + beta_j) / prod_j Gamma(a + beta_j)`.
fn series_prefactor<T: Real>(p: &MBParameterSet<T>) -> Result<C<T>, Error> {
    let a = p.a.expect("R family has a");
    let mut acc = (czero::<T>() + factorial::<T>(p.n)).ln();
    for &bj in &p.betas {
        for &al in &p.alphas {
            acc = acc + log_gamma(al + bj)?;
        }
        acc = acc - log_gamma(a + bj)?;
    }
    Ok(acc.exp() * r_phase_prefactor(p))
}

/// The residue series for R+/R-: prefactor times the truncated bare sum.
pub fn residue_series<T: Real>(
    p: &MBParameterSet<T>,
    n_max: usize,
) -> Result<SeriesResult<T>, Error> {
    let bare = milne_sum(p, n_max)?;
    let prefactor = series_prefactor(p)?;
    Ok(SeriesResult {
        value: prefactor * bare.value,
        terms_used: bare.terms_used,
        tail_estimate: bare.tail_estimate * prefactor.norm(),
    })
}

/// The value Milne's summation theorem assigns to the bare sum:
/// `Gamma(nu) prod_{j<=N} Gamma(a + beta_j) / prod_{j<=N+1} Gamma(a - alpha_j)`.
pub fn milne_closed_form<T: Real>(p: &MBParameterSet<T>) -> Result<C<T>, Error> {
    require_r_family(p)?;
    let a = p.a.expect("R family has a");
    let nu = derived_quantities(p).nu.expect("R family has a");
    let mut acc = log_gamma(nu)?;
    for &bj in &p.betas {
        acc = acc + log_gamma(a + bj)?;
    }
    for &al in &p.alphas {
        acc = acc - log_gamma(a - al)?;
    }
    Ok(acc.exp())
}
