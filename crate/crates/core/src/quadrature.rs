//! Straight-contour quadrature: integrates integrands along vertical lines
//! `Re z = c` in one to three dimensions, with truncation control and error
//! estimates.
//!
//! The core region `Im z in [-T, T]` is covered by composite 16-node
//! Gauss-Legendre panels of width `16 / nodes_per_unit`, so `nodes_per_unit`
//! is the average node density along the line. The family integrands are
//! non-oscillatory on vertical lines (the `t log t` gamma phases cancel
//! between the `Gamma(alpha - z) Gamma(beta + z)` pairs), which makes panel
//! Gauss-Legendre geometrically convergent here.
//!
//! Tails beyond `T` are probed and classified per direction. Exponentially
//! decaying tails are bounded and charged to the error estimate. Power-like
//! tails (the R+/R- integrands decay like `u^{-1-nu}` in one direction, and
//! the three-stars integrand like a power in both) would otherwise dominate
//! the budget, so the rule is extended with log-stretched panels
//! `u = T e^s` and finished with an analytic completion of the fitted power
//! envelope beyond the last panel. For tensor integrals the completion is
//! computed from the marginal of the integrand over the other axes, which is
//! exact bookkeeping when the integrand is symmetric under coordinate
//! permutations (true for every family here); the error estimate carries the
//! model and round-off margins of that completion.
//!
//! The error estimate is the documented additive combination of
//! (a) the difference against a half-density pass, (b) exponential tail
//! bounds, and (c) the power-completion model and round-off margins.
//!
//! Node evaluations may run in parallel; accumulation order (panel order,
//! pairwise summation) is fixed, so results are bit-reproducible regardless
//! of the schedule.

use crate::error::Error;
use crate::scalar::{czero, Real, C};
use num_complex::Complex;
use rayon::prelude::*;
use std::sync::OnceLock;

/// Where and how a vertical-line integral is discretized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec<T: Real> {
    /// The `c` in `Re z = c`.
    pub shift: T,
    /// Core truncation height: the panel region covers `Im z in [-T, T]`.
    pub truncation: T,
    /// Average node density per unit height (panels hold 16 nodes each).
    pub nodes_per_unit: u32,
}

impl<T: Real> ContourSpec<T> {
    pub fn new(shift: T, truncation: T, nodes_per_unit: u32) -> Result<Self, Error> {
        if !(truncation >= T::of(5.0)) {
            return Err(Error::InvalidContour {
                detail: format!("truncation T = {} must be at least 5", truncation.as_f64()),
            });
        }
        if nodes_per_unit < 4 {
            return Err(Error::InvalidContour {
                detail: format!("nodes_per_unit = {nodes_per_unit} must be at least 4"),
            });
        }
        Ok(Self { shift, truncation, nodes_per_unit })
    }

    /// Defaults used by the verification harness. Densities are calibrated
    /// to the observed panel error on randomly sampled instances: the worst
    /// one-dimensional integrand needs ~16 nodes/unit to clear 1e-8, and the
    /// budgets relax by two decades per added dimension while the node count
    /// compounds, so density backs off as the dimension grows.
    pub fn default_for_dimension(dim: usize) -> Self {
        match dim {
            0 | 1 => Self { shift: T::zero(), truncation: T::of(40.0), nodes_per_unit: 20 },
            2 => Self { shift: T::zero(), truncation: T::of(30.0), nodes_per_unit: 12 },
            _ => Self { shift: T::zero(), truncation: T::of(30.0), nodes_per_unit: 8 },
        }
    }
}

/// Every numeric integral's return contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T: Real> {
    pub value: C<T>,
    pub error_estimate: T,
    pub evaluations: u64,
}

/// Per-variable contour measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// `dz / (2 pi i)` per variable.
    Standard,
    /// `dz / (4 pi i)` per variable (the three-stars normalization), exactly
    /// half the standard measure per dimension.
    Half,
}

impl Measure {
    fn factor<T: Real>(self) -> T {
        match self {
            Measure::Standard => T::of(0.5) / T::PI(),
            Measure::Half => T::of(0.25) / T::PI(),
        }
    }
}

/// Tail direction along the contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailDirection {
    Up,
    Down,
}

impl TailDirection {
    fn sign<T: Real>(self) -> T {
        match self {
            TailDirection::Up => T::one(),
            TailDirection::Down => -T::one(),
        }
    }
}

const GL_NODES: usize = 16;
/// Numeric tail extension stops at `u = T e^{S_MAX}`: the cancellation noise
/// in the log-gamma exponents grows like `u * eps` and the log-stretched
/// measure amplifies it by `e^s`, so pushing deeper numerically loses more
/// than the analytic completion gains.
const S_MAX: f64 = 12.0;
const EXT_PANEL_WIDTH: f64 = 1.0;

fn gl16() -> &'static [(f64, f64); GL_NODES] {
    static CACHE: OnceLock<[(f64, f64); GL_NODES]> = OnceLock::new();
    CACHE.get_or_init(|| {
        // Newton iteration on P_16; nodes on (-1, 1).
        let n = GL_NODES;
        let mut out = [(0.0f64, 0.0f64); GL_NODES];
        for k in 0..n {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0f64, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out[n - 1 - k] = (x, w);
        }
        out
    })
}

/// Deterministic pairwise (cascade) summation.
pub(crate) fn pairwise_sum<T: Real>(v: &[C<T>]) -> C<T> {
    match v.len() {
        0 => czero(),
        1 => v[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TailClass<T: Real> {
    /// |f| vanishes at the probes.
    Negligible,
    /// Exponential envelope `y0 e^{-lambda (t - T)}`.
    Exponential { bound: T },
    /// Power envelope `y0 (t/T)^{-p}`; extended numerically.
    Power { p: T, bound: T },
    /// |f| fails to decrease: no usable bound.
    NonDecreasing,
}

/// Probes |f| at T, 1.25 T, 1.5 T in the given direction and classifies the
/// decay. Returns the class and the number of evaluations spent.
fn probe_tail<T, F>(f: &F, contour: &ContourSpec<T>, direction: TailDirection) -> (TailClass<T>, u64)
where
    T: Real,
    F: Fn(C<T>) -> Result<C<T>, Error>,
{
    let tt = contour.truncation;
    let sgn = direction.sign::<T>();
    let heights = [tt, tt * T::of(1.25), tt * T::of(1.5)];
    let mut mags = [T::zero(); 3];
    for (i, &h) in heights.iter().enumerate() {
        let z = Complex::new(contour.shift, sgn * h);
        match f(z) {
            Ok(v) if v.re.is_finite() && v.im.is_finite() => mags[i] = v.norm(),
            _ => return (TailClass::NonDecreasing, (i + 1) as u64),
        }
    }
    let [y0, y1, y2] = mags;
    if y0 == T::zero() {
        return (TailClass::Negligible, 3);
    }
    if y2 >= y0 || y2 == T::zero() {
        // y2 = 0 with y0 > 0: decay faster than representable
        if y2 == T::zero() {
            return (TailClass::Negligible, 3);
        }
        return (TailClass::NonDecreasing, 3);
    }
    let ln_ratio = (y0 / y2).ln();
    // exponential model: lambda = ln(y0/y2) / (0.5 T)
    let lambda = ln_ratio / (tt * T::of(0.5));
    // power model: p = ln(y0/y2) / ln 1.5
    let p = ln_ratio / T::of(1.5f64.ln());
    let pred_exp = y0.ln() - lambda * tt * T::of(0.25);
    let pred_pow = y0.ln() - p * T::of(1.25f64.ln());
    let y1ln = if y1 > T::zero() { y1.ln() } else { T::of(-750.0) };
    let exp_resid = (pred_exp - y1ln).abs();
    let pow_resid = (pred_pow - y1ln).abs();
    if exp_resid <= pow_resid {
        (TailClass::Exponential { bound: y0 / lambda }, 3)
    } else if p > T::of(1.0 + 1e-6) {
        (TailClass::Power { p, bound: y0 * tt / (p - T::one()) }, 3)
    } else {
        (TailClass::NonDecreasing, 3)
    }
}

/// Empirical tail bound: samples |f| at `T, 1.25 T, 1.5 T`, fits an
/// exponential or power envelope (whichever fits the middle probe better)
/// and integrates it analytically beyond `T`. Returns `+inf` when |f| is
/// non-decreasing at the probes (or the power exponent is not integrable).
pub fn estimate_tail<T, F>(f: F, contour: &ContourSpec<T>, direction: TailDirection) -> T
where
    T: Real,
    F: Fn(C<T>) -> Result<C<T>, Error>,
{
    match probe_tail(&f, contour, direction).0 {
        TailClass::Negligible => T::zero(),
        TailClass::Exponential { bound } | TailClass::Power { bound, .. } => bound,
        TailClass::NonDecreasing => T::infinity(),
    }
}

/// Deeper probe (heights T, 2T, 4T) used by the integration planner. The
/// close-spaced public probe cannot separate a slow power `u^{-1-nu}` from
/// an exponential once the O(1/u) corrections reach a few percent, so the
/// planner spreads the probes and resolves ambiguity in favor of a power
/// extension: the extension is cheap and its deep completion fit measures
/// the true exponent far more accurately than any probe.
fn plan_probe<T, F>(f: &F, contour: &ContourSpec<T>, direction: TailDirection) -> (TailClass<T>, u64)
where
    T: Real,
    F: Fn(C<T>) -> Result<C<T>, Error>,
{
    let tt = contour.truncation;
    let sgn = direction.sign::<T>();
    let heights = [tt, tt * T::of(2.0), tt * T::of(4.0)];
    let mut mags = [T::zero(); 3];
    for (i, &h) in heights.iter().enumerate() {
        let z = Complex::new(contour.shift, sgn * h);
        match f(z) {
            Ok(v) if v.re.is_finite() && v.im.is_finite() => mags[i] = v.norm(),
            _ => return (TailClass::NonDecreasing, (i + 1) as u64),
        }
    }
    let [y0, y1, y2] = mags;
    if y0 == T::zero() {
        return (TailClass::Negligible, 3);
    }
    if y1 == T::zero() {
        // decay faster than representable over one T
        return (TailClass::Exponential { bound: y0 }, 3);
    }
    if y2 == T::zero() {
        let lambda = (y0 / y1).ln() / tt;
        return (TailClass::Exponential { bound: y0 / lambda }, 3);
    }
    if y2 >= y0 {
        return (TailClass::NonDecreasing, 3);
    }
    let ln_ratio = (y0 / y2).ln();
    let lambda = ln_ratio / (tt * T::of(3.0));
    let p = ln_ratio / T::of(4.0f64.ln());
    let pred_exp = y0.ln() - lambda * tt;
    let pred_pow = y0.ln() - p * T::of(2.0f64.ln());
    let y1ln = y1.ln();
    let exp_resid = (pred_exp - y1ln).abs();
    let pow_resid = (pred_pow - y1ln).abs();
    // exponential must win clearly; anything ambiguous gets the extension
    if exp_resid < pow_resid * T::of(0.5) {
        (TailClass::Exponential { bound: y0 / lambda }, 3)
    } else if p > T::of(0.2) {
        let bound = if p > T::of(1.0 + 1e-9) {
            y0 * tt / (p - T::one())
        } else {
            T::infinity()
        };
        (TailClass::Power { p, bound }, 3)
    } else {
        (TailClass::NonDecreasing, 3)
    }
}

#[derive(Debug, Clone)]
struct DirectionPlan<T: Real> {
    class: TailClass<T>,
    /// s-panel boundaries of the numeric extension (empty if none).
    s_panels: Vec<(T, T)>,
    /// `u = T e^{s_end}` where the numeric extension stops.
    u_end: T,
}

#[derive(Debug, Clone)]
struct RulePoint<T: Real> {
    z: C<T>,
    w: T,
}

#[derive(Debug, Clone)]
struct AxisRule<T: Real> {
    points: Vec<RulePoint<T>>,
    /// Index ranges of the extension nodes, per direction, in `points`.
    ext_down: std::ops::Range<usize>,
    ext_up: std::ops::Range<usize>,
}

/// Decides the numeric-extension schedule for one power-like direction by
/// probing |f| at successive panel boundaries `u = T e^{s}`.
fn plan_extension<T, F>(
    f: &F,
    contour: &ContourSpec<T>,
    direction: TailDirection,
    p_fit: T,
    evals: &mut u64,
) -> DirectionPlan<T>
where
    T: Real,
    F: Fn(C<T>) -> Result<C<T>, Error>,
{
    let tt = contour.truncation;
    let sgn = direction.sign::<T>();
    let mut s_panels = Vec::new();
    let mut s = T::zero();
    // slow tails (p near 1) always extend to the cap
    let p_slack = (p_fit - T::one()).max(T::of(0.02));
    let full_tail = {
        let z = Complex::new(contour.shift, sgn * tt);
        *evals += 1;
        match f(z) {
            Ok(v) => v.norm() * tt / p_slack,
            Err(_) => T::infinity(),
        }
    };
    let cutoff = full_tail * T::of(1e-13);
    while s.as_f64() < S_MAX {
        let s_next = (s + T::of(EXT_PANEL_WIDTH)).min(T::of(S_MAX));
        s_panels.push((s, s_next));
        s = s_next;
        let u = tt * s.exp();
        let z = Complex::new(contour.shift, sgn * u);
        *evals += 1;
        let remaining = match f(z) {
            Ok(v) => v.norm() * u / p_slack,
            Err(_) => T::infinity(),
        };
        if remaining <= cutoff {
            break;
        }
    }
    DirectionPlan {
        class: TailClass::Power { p: p_fit, bound: full_tail },
        s_panels,
        u_end: tt * s.exp(),
    }
}

/// Builds the node/weight rule for one axis: central panels plus any
/// extension panels the tail plans call for. `density_divisor` = 1 for the
/// full rule, 2 for the half-density pass.
fn build_axis_rule<T: Real>(
    contour: &ContourSpec<T>,
    down: &DirectionPlan<T>,
    up: &DirectionPlan<T>,
    density_divisor: u32,
) -> AxisRule<T> {
    let gl = gl16();
    let tt = contour.truncation;
    let npu = (contour.nodes_per_unit / density_divisor).max(2);
    let width = T::of(16.0) / T::of(npu as f64);
    let mut points = Vec::new();

    let push_panel = |points: &mut Vec<RulePoint<T>>, lo: T, hi: T, stretch: Option<T>| {
        // stretch = Some(sign): panel in s-space, node t = sign * T e^s,
        // weight gains the Jacobian T e^s.
        let half = (hi - lo) * T::of(0.5);
        let mid = (hi + lo) * T::of(0.5);
        for &(x, w) in gl.iter() {
            let xi = mid + half * T::of(x);
            let wi = half * T::of(w);
            match stretch {
                None => points.push(RulePoint {
                    z: Complex::new(contour.shift, xi),
                    w: wi,
                }),
                Some(sign) => {
                    let u = tt * xi.exp();
                    points.push(RulePoint {
                        z: Complex::new(contour.shift, sign * u),
                        w: wi * u,
                    });
                }
            }
        }
    };

    // central panels, mirrored about t = 0 so the node set is symmetric
    let n_panels = (tt / width).as_f64().ceil().max(1.0) as usize;
    for i in 0..n_panels {
        let lo = width * T::of(i as f64);
        let hi = (lo + width).min(tt);
        push_panel(&mut points, lo, hi, None);
        push_panel(&mut points, -hi, -lo, None);
    }

    // extension panels (coarsened for the half-density pass)
    let extend = |points: &mut Vec<RulePoint<T>>, plan: &DirectionPlan<T>, sign: T| {
        let start = points.len();
        if !plan.s_panels.is_empty() {
            let coarsen = density_divisor as usize;
            let mut i = 0;
            while i < plan.s_panels.len() {
                let lo = plan.s_panels[i].0;
                let hi = plan.s_panels[(i + coarsen - 1).min(plan.s_panels.len() - 1)].1;
                push_panel(points, lo, hi, Some(sign));
                i += coarsen;
            }
        }
        start..points.len()
    };
    let ext_down = extend(&mut points, down, -T::one());
    let ext_up = extend(&mut points, up, T::one());

    AxisRule { points, ext_down, ext_up }
}

struct PassOutcome<T: Real> {
    /// Raw numeric sum (no measure factor).
    raw: C<T>,
    /// Marginal of the integrand over the other axes, per axis-0 node
    /// (equals the integrand itself for dim = 1).
    marginal: Vec<C<T>>,
    evaluations: u64,
}

/// Tensor sum over the rule, outer axis parallelized, deterministic
/// accumulation. Returns the raw sum and the axis-0 marginal.
fn tensor_pass<T, F>(f: &F, rule: &AxisRule<T>, dim: usize) -> Result<PassOutcome<T>, Error>
where
    T: Real,
    F: Fn(&[C<T>]) -> Result<C<T>, Error> + Sync,
{
    let pts = &rule.points;
    let m = pts.len();
    let marginal: Vec<C<T>> = (0..m)
        .into_par_iter()
        .map(|i0| -> Result<C<T>, Error> {
            let z0 = pts[i0].z;
            match dim {
                1 => {
                    let v = f(&[z0])?;
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(Error::NonFiniteIntegrand {
                            re: z0.re.as_f64(),
                            im: z0.im.as_f64(),
                        });
                    }
                    Ok(v)
                }
                2 => {
                    let mut buf = Vec::with_capacity(m);
                    for p1 in pts.iter() {
                        let v = f(&[z0, p1.z])?;
                        if !(v.re.is_finite() && v.im.is_finite()) {
                            return Err(Error::NonFiniteIntegrand {
                                re: p1.z.re.as_f64(),
                                im: p1.z.im.as_f64(),
                            });
                        }
                        buf.push(v * p1.w);
                    }
                    Ok(pairwise_sum(&buf))
                }
                3 => {
                    let mut outer = Vec::with_capacity(m);
                    let mut buf = Vec::with_capacity(m);
                    for p1 in pts.iter() {
                        buf.clear();
                        for p2 in pts.iter() {
                            let v = f(&[z0, p1.z, p2.z])?;
                            if !(v.re.is_finite() && v.im.is_finite()) {
                                return Err(Error::NonFiniteIntegrand {
                                    re: p2.z.re.as_f64(),
                                    im: p2.z.im.as_f64(),
                                });
                            }
                            buf.push(v * p2.w);
                        }
                        outer.push(pairwise_sum(&buf) * p1.w);
                    }
                    Ok(pairwise_sum(&outer))
                }
                _ => unreachable!("dimension checked by caller"),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let weighted: Vec<C<T>> = marginal
        .iter()
        .zip(pts.iter())
        .map(|(v, p)| *v * p.w)
        .collect();
    Ok(PassOutcome {
        raw: pairwise_sum(&weighted),
        marginal,
        evaluations: (m as u64).pow(dim as u32),
    })
}

/// Analytic completion of one power-like direction from the marginal values
/// on its extension nodes. Fits the three-term model
/// `ln G(u) = ln A - p ln u + c/u` (complex coefficients, real design) over
/// the last extension panels and integrates
/// `A u^{-p} (1 + c/u)` beyond the end of the numeric extension, which
/// pushes the model error from O(1/u_end) down to O(1/u_end^2).
/// Returns (completion value, error margin).
fn direction_completion<T: Real>(
    rule: &AxisRule<T>,
    range: &std::ops::Range<usize>,
    plan: &DirectionPlan<T>,
    marginal: &[C<T>],
) -> (C<T>, T) {
    if range.is_empty() {
        return (czero(), T::zero());
    }
    let n_fit = (2 * GL_NODES).min(range.len());
    let lo = range.end - n_fit;

    // unwrap the complex log along the node sequence: increments are small,
    // so the ratio log never wraps
    let mut ys: Vec<C<T>> = Vec::with_capacity(n_fit);
    let mut xs: Vec<(T, T)> = Vec::with_capacity(n_fit);
    let mut prev: Option<(C<T>, C<T>)> = None;
    for i in lo..range.end {
        let g = marginal[i];
        if g.norm() <= T::zero() {
            // tail underflowed: nothing left to complete
            return (czero(), T::zero());
        }
        let y = match prev {
            None => g.ln(),
            Some((py, pg)) => py + (g / pg).ln(),
        };
        prev = Some((y, g));
        let u = rule.points[i].z.im.abs();
        ys.push(y);
        xs.push((u.ln(), T::one() / u));
    }
    if ys.len() < 4 {
        return (czero(), T::zero());
    }

    // least squares for y = a0 + a1 ln u + a2 / u
    let mut m = [[T::zero(); 3]; 3];
    let mut rhs = [czero::<T>(); 3];
    for (k, &(lnu, inv_u)) in xs.iter().enumerate() {
        let row = [T::one(), lnu, inv_u];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = m[i][j] + row[i] * row[j];
            }
            rhs[i] = rhs[i] + ys[k] * row[i];
        }
    }
    let coeffs = match solve3_real_complex(&m, &rhs) {
        Some(c) => c,
        None => return (czero(), tail_bound_of(plan)),
    };
    let a = coeffs[0].exp();
    let p = -coeffs[1];
    let c_corr = coeffs[2];
    if !(p.re > T::of(1.01)) {
        // not integrable as fitted: charge the probe bound to the margin
        return (czero(), tail_bound_of(plan));
    }
    let u_end = plan.u_end;
    let ln_u_end = Complex::new(u_end.ln(), T::zero());
    // int_{u_end}^inf A u^{-p} (1 + c/u) du
    let one = Complex::new(T::one(), T::zero());
    let head = ((one - p) * ln_u_end).exp() / (p - one);
    let corr = c_corr * (-p * ln_u_end).exp() / p;
    let completion = a * (head + corr);
    // residual model error is O(1/u_end^2); fit inputs carry round-off noise
    // ~ u * eps from the log-gamma exponent cancellations
    let margin = completion.norm()
        * (T::of(10.0) / (u_end * u_end) + u_end * T::of(1e-15))
        + noise_margin(rule, range, marginal);
    (completion, margin)
}

fn tail_bound_of<T: Real>(plan: &DirectionPlan<T>) -> T {
    match plan.class {
        TailClass::Power { bound, .. } => bound,
        TailClass::Exponential { bound } => bound,
        TailClass::Negligible => T::zero(),
        TailClass::NonDecreasing => T::infinity(),
    }
}

/// Solves a real-symmetric 3x3 system with complex right-hand side; `None`
/// when singular.
fn solve3_real_complex<T: Real>(a: &[[T; 3]; 3], b: &[C<T>; 3]) -> Option<[C<T>; 3]> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if det == T::zero() || !det.is_finite() {
        return None;
    }
    let mut inv = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let r0 = (i + 1) % 3;
            let r1 = (i + 2) % 3;
            let c0 = (j + 1) % 3;
            let c1 = (j + 2) % 3;
            inv[j][i] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / det;
        }
    }
    let mut out = [czero::<T>(); 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] = out[i] + b[j] * inv[i][j];
        }
    }
    Some(out)
}

/// Round-off allowance for the numeric extension region itself.
fn noise_margin<T: Real>(
    rule: &AxisRule<T>,
    range: &std::ops::Range<usize>,
    marginal: &[C<T>],
) -> T {
    let mut acc = T::zero();
    for i in range.clone() {
        let u = rule.points[i].z.im.abs();
        acc = acc + rule.points[i].w * marginal[i].norm() * (u * T::of(3e-16)).min(T::of(1.0));
    }
    acc
}

/// Integrates `f` over the product of `dim` copies of the contour with the
/// requested per-variable measure. For `dim >= 2` the power-tail completion
/// assumes `f` is symmetric under coordinate permutations (true for every
/// integral family in this crate); purely exponential integrands carry no
/// such assumption.
pub fn integrate_tensor<T, F>(
    f: F,
    contour: &ContourSpec<T>,
    dim: usize,
    measure: Measure,
) -> Result<QuadResult<T>, Error>
where
    T: Real,
    F: Fn(&[C<T>]) -> Result<C<T>, Error> + Sync,
{
    const MAX_DIM: usize = 3;
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
    }
    let mut evals: u64 = 0;

    // probe line: the running axis, other coordinates parked at staggered
    // heights (so no structural zero of a symmetric integrand is sampled)
    let probe = |z0: C<T>| -> Result<C<T>, Error> {
        let mut zs = [czero::<T>(); MAX_DIM];
        zs[0] = z0;
        for (k, slot) in zs.iter_mut().enumerate().take(dim).skip(1) {
            *slot = Complex::new(contour.shift, T::of(0.437 * k as f64));
        }
        f(&zs[..dim])
    };

    let (down_class, e1) = plan_probe(&probe, contour, TailDirection::Down);
    let (up_class, e2) = plan_probe(&probe, contour, TailDirection::Up);
    evals += e1 + e2;

    let mut plan_for = |class: TailClass<T>, direction: TailDirection| match class {
        TailClass::Power { p, .. } => plan_extension(&probe, contour, direction, p, &mut evals),
        other => DirectionPlan { class: other, s_panels: Vec::new(), u_end: contour.truncation },
    };
    let down_plan = plan_for(down_class, TailDirection::Down);
    let up_plan = plan_for(up_class, TailDirection::Up);

    let rule_full = build_axis_rule(contour, &down_plan, &up_plan, 1);
    let rule_half = build_axis_rule(contour, &down_plan, &up_plan, 2);

    let full = tensor_pass(&f, &rule_full, dim)?;
    let half = tensor_pass(&f, &rule_half, dim)?;
    evals += full.evaluations + half.evaluations;

    let measure_pow = {
        let mut m = T::one();
        for _ in 0..dim {
            m = m * measure.factor::<T>();
        }
        m
    };

    let assemble = |rule: &AxisRule<T>, pass: &PassOutcome<T>| -> (C<T>, T) {
        let (c_down, m_down) =
            direction_completion(rule, &rule.ext_down, &down_plan, &pass.marginal);
        let (c_up, m_up) = direction_completion(rule, &rule.ext_up, &up_plan, &pass.marginal);
        let total = (pass.raw + (c_down + c_up) * T::of(dim as f64)) * measure_pow;
        let margin = (m_down + m_up) * T::of(dim as f64) * measure_pow;
        (total, margin)
    };

    let (value_full, margin_full) = assemble(&rule_full, &full);
    let (value_half, _) = assemble(&rule_half, &half);

    // exponential (or unbounded) tail allowances
    let mut tail_term = T::zero();
    for plan in [&down_plan, &up_plan] {
        match plan.class {
            TailClass::Exponential { bound } => {
                tail_term = tail_term + bound * T::of(dim as f64) * measure_pow
            }
            TailClass::NonDecreasing => tail_term = T::infinity(),
            _ => {}
        }
    }

    let error_estimate = (value_full - value_half).norm() + margin_full + tail_term;
    Ok(QuadResult { value: value_full, error_estimate, evaluations: evals })
}

/// Integrates `(1/2 pi i) * int f(z) dz` along the vertical contour.
pub fn integrate_line<T, F>(f: F, contour: &ContourSpec<T>) -> Result<QuadResult<T>, Error>
where
    T: Real,
    F: Fn(C<T>) -> Result<C<T>, Error> + Sync,
{
    integrate_tensor(|z: &[C<T>]| f(z[0]), contour, 1, Measure::Standard)
}
