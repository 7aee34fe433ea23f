//! The verification harness: pairs LHS routes (quadrature, series,
//! determinant, residue extraction) with the closed-form right-hand sides,
//! samples parameters deterministically, and produces pass/fail reports.
//!
//! Sampling is counter-based: every draw is a pure function of
//! (seed, family, N, instance index, draw counter), so instance `i` is
//! reproducible in isolation and two runs with the same `SuiteConfig`
//! serialize to byte-identical reports.

use crate::determinant::{
    extract_residue, r_via_determinant_with_error, residue_prediction_reduced, RSign,
};
use crate::error::Error;
use crate::model::{
    closed_form_rhs, derived_quantities, pair_log, per_variable_log, validate, MBFamily,
    MBParameterSet, ValidationReport,
};
use crate::quadrature::{integrate_tensor, ContourSpec};
use crate::series::residue_series;
use crate::ComplexValue;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::RwLock;

/// Left-hand-side evaluation routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Route {
    #[serde(rename = "quadrature")]
    Quadrature,
    #[serde(rename = "series")]
    Series,
    #[serde(rename = "determinant")]
    Determinant,
    #[serde(rename = "residue-extraction")]
    ResidueExtraction,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Quadrature => "quadrature",
            Route::Series => "series",
            Route::Determinant => "determinant",
            Route::ResidueExtraction => "residue-extraction",
        }
    }

    pub fn parse(s: &str) -> Option<Route> {
        match s {
            "quadrature" => Some(Route::Quadrature),
            "series" => Some(Route::Series),
            "determinant" => Some(Route::Determinant),
            "residue-extraction" => Some(Route::ResidueExtraction),
            _ => None,
        }
    }

    /// Routes applicable to a family: the series and determinant
    /// representations exist for R+/R- only.
    pub fn applicable(family: MBFamily) -> &'static [Route] {
        match family {
            MBFamily::RPlus | MBFamily::RMinus => &[
                Route::Quadrature,
                Route::Series,
                Route::Determinant,
                Route::ResidueExtraction,
            ],
            _ => &[Route::Quadrature],
        }
    }
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Echo of the numeric configuration a report was produced under.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ReportConfig {
    pub seed: u64,
    pub instance: usize,
    pub truncation: f64,
    pub nodes_per_unit: u32,
    pub n_max: usize,
    pub epsilons: Vec<f64>,
    pub evaluations: u64,
    /// Reported LHS error budget in absolute terms (tail / quadrature
    /// estimates), when the route provides one.
    pub lhs_error_estimate: f64,
    pub messages: Vec<String>,
}

/// The unit of output: one LHS/RHS comparison.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VerificationReport {
    pub family: MBFamily,
    pub params: MBParameterSet<f64>,
    pub route: Route,
    pub lhs: Option<[f64; 2]>,
    pub rhs: Option<[f64; 2]>,
    pub abs_err: f64,
    pub rel_err: f64,
    pub budget: f64,
    pub pass: bool,
    pub config: ReportConfig,
}

/// Suite-level configuration; same seed implies identical parameter samples
/// and bit-identical reports.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances_per_family: usize,
    pub n_values: Vec<usize>,
    /// (family, route) -> relative budget override.
    pub tolerance_overrides: Vec<(MBFamily, Route, f64)>,
    pub n_max: usize,
    pub epsilons: Vec<f64>,
    /// Contour overrides; `None` picks the per-dimension default.
    pub truncation: Option<f64>,
    pub nodes_per_unit: Option<u32>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            instances_per_family: 5,
            n_values: vec![1, 2],
            tolerance_overrides: Vec::new(),
            n_max: 60,
            epsilons: vec![0.2, 0.1, 0.05],
            truncation: None,
            nodes_per_unit: None,
        }
    }
}

impl SuiteConfig {
    pub fn contour_for(&self, n: usize) -> ContourSpec<f64> {
        let mut contour = ContourSpec::default_for_dimension(n);
        if let Some(t) = self.truncation {
            contour.truncation = t;
        }
        if let Some(npu) = self.nodes_per_unit {
            contour.nodes_per_unit = npu;
        }
        contour
    }

    /// Base relative budget per dimension: tensor quadrature error compounds
    /// per dimension.
    pub fn base_budget(n: usize) -> f64 {
        match n {
            1 => 1e-8,
            2 => 1e-6,
            _ => 1e-4,
        }
    }

    fn budget_override(&self, family: MBFamily, route: Route) -> Option<f64> {
        self.tolerance_overrides
            .iter()
            .find(|(f, r, _)| *f == family && *r == route)
            .map(|&(_, _, b)| b)
    }
}

// --- counter-based sampling -------------------------------------------------

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn family_id(family: MBFamily) -> u64 {
    MBFamily::ALL.iter().position(|&f| f == family).unwrap() as u64
}

/// Draw `k` of instance (family, n, seed, index), uniform in [0, 1).
fn draw(family: MBFamily, n: usize, seed: u64, index: usize, counter: u64) -> f64 {
    let key = splitmix(
        seed ^ family_id(family).wrapping_mul(0x9E37_79B9_0000_0001)
            ^ (n as u64).wrapping_mul(0x0000_0100_0000_01B3)
            ^ (index as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93),
    );
    let bits = splitmix(key.wrapping_add(counter.wrapping_mul(0xA076_1D64_78BD_642F)));
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

fn near_integer(z: ComplexValue, margin: f64) -> bool {
    let nearest = z.re.round();
    ((z.re - nearest).powi(2) + z.im * z.im).sqrt() < margin
}

fn near_nonpositive_integer(z: ComplexValue, margin: f64) -> bool {
    z.re.round() <= 0.5 && near_integer(z, margin)
}

/// True when all closed-form gamma arguments stay clear of non-positive
/// integers and the beta spacings (including the derived `1 - a`) stay clear
/// of integers.
fn sample_is_safe(p: &MBParameterSet<f64>) -> bool {
    const MARGIN: f64 = 0.05;
    let d = derived_quantities(p);
    // generic beta spacing (the residue series degenerates on integer
    // spacings); the derived beta_{N+1} = 1 - a only enters through
    // a + beta_j, which is checked with the other gamma arguments below
    for k in 0..p.betas.len() {
        for j in (k + 1)..p.betas.len() {
            if near_integer(p.betas[k] - p.betas[j], MARGIN) {
                return false;
            }
        }
    }
    match p.family {
        MBFamily::GustafsonFirst => {
            for &al in &p.alphas {
                for &be in &p.betas {
                    if near_nonpositive_integer(al + be, MARGIN) {
                        return false;
                    }
                }
            }
            !near_nonpositive_integer(d.alpha_sum + d.beta_sum, MARGIN)
        }
        MBFamily::GustafsonSecond | MBFamily::TReduced => {
            let gamma_param = d.gamma_param.unwrap();
            for &al in &p.alphas {
                for &be in &p.betas {
                    if near_nonpositive_integer(al + be, MARGIN) {
                        return false;
                    }
                }
                if near_nonpositive_integer(gamma_param - al, MARGIN) {
                    return false;
                }
            }
            true
        }
        MBFamily::RPlus | MBFamily::RMinus => {
            let a = p.a.unwrap();
            for &al in &p.alphas {
                for &be in &p.betas {
                    if near_nonpositive_integer(al + be, MARGIN) {
                        return false;
                    }
                }
                if near_nonpositive_integer(a - al, MARGIN) {
                    return false;
                }
            }
            for &be in &p.betas {
                if near_nonpositive_integer(a + be, MARGIN) {
                    return false;
                }
            }
            true
        }
        MBFamily::ThreeStars => {
            let beta = p.betas[0];
            if near_nonpositive_integer(beta - d.alpha_sum, MARGIN) {
                return false;
            }
            for k in 0..p.alphas.len() {
                if near_nonpositive_integer(beta - p.alphas[k], MARGIN) {
                    return false;
                }
                for j in (k + 1)..p.alphas.len() {
                    if near_nonpositive_integer(p.alphas[k] + p.alphas[j], MARGIN) {
                        return false;
                    }
                }
            }
            true
        }
    }
}

/// Deterministic parameter sampling in the safe region: Re parts uniform in
/// [0.3, 1.2], Im parts in [-0.3, 0.3]; R+/R- additionally set
/// `a = A + B + nu` with `nu` in [0.3, 1.0], and the three-stars family sets
/// `beta = A + offset` with the offset in [1.5, 3.0] (its integrand decays
/// like `|t|^{-2 Re(beta - A) - 1}`, so the offset keeps quadrature
/// convergent with margin).
pub fn random_params(
    family: MBFamily,
    n: usize,
    seed: u64,
    index: usize,
) -> Result<MBParameterSet<f64>, Error> {
    const MAX_ATTEMPTS: usize = 1000;
    let (na, nb, has_a) = family.arity(n);
    let mut counter = 0u64;
    let next = |counter: &mut u64| {
        let v = draw(family, n, seed, index, *counter);
        *counter += 1;
        v
    };
    for _ in 0..MAX_ATTEMPTS {
        let mut alphas = Vec::with_capacity(na);
        for _ in 0..na {
            let re = 0.3 + 0.9 * next(&mut counter);
            let im = -0.3 + 0.6 * next(&mut counter);
            alphas.push(crate::c64(re, im));
        }
        let alpha_sum: ComplexValue = alphas.iter().sum();
        let betas: Vec<ComplexValue> = match family {
            MBFamily::ThreeStars => {
                let offset = 1.5 + 1.5 * next(&mut counter);
                vec![alpha_sum + crate::c64(offset, 0.0)]
            }
            _ => (0..nb)
                .map(|_| {
                    let re = 0.3 + 0.9 * next(&mut counter);
                    let im = -0.3 + 0.6 * next(&mut counter);
                    crate::c64(re, im)
                })
                .collect(),
        };
        let a = if has_a {
            let beta_sum: ComplexValue = betas.iter().sum();
            let nu = 0.3 + 0.7 * next(&mut counter);
            Some(alpha_sum + beta_sum + crate::c64(nu, 0.0))
        } else {
            None
        };
        let p = MBParameterSet::new(family, n, alphas, betas, a)?;
        if sample_is_safe(&p) && validate(&p, 0.0).ok {
            return Ok(p);
        }
    }
    Err(Error::SamplingFailed { attempts: MAX_ATTEMPTS })
}

// --- memoized integrand ------------------------------------------------------

/// Integrand closure with the per-variable gamma products memoized by node.
/// Tensor quadrature revisits each 1-D node in `M^(dim-1)` grid points, so
/// the cache turns the per-evaluation cost into cross factors plus one exp.
pub fn fast_integrand(
    p: &MBParameterSet<f64>,
) -> impl Fn(&[ComplexValue]) -> Result<ComplexValue, Error> + Sync + '_ {
    let cache: RwLock<HashMap<(u64, u64), ComplexValue>> = RwLock::new(HashMap::new());
    move |z: &[ComplexValue]| {
        let mut acc = crate::c64(0.0, 0.0);
        for &zj in z {
            let key = (zj.re.to_bits(), zj.im.to_bits());
            let cached = cache.read().expect("cache lock").get(&key).copied();
            let term = match cached {
                Some(v) => v,
                None => {
                    let v = per_variable_log(p, zj)?;
                    cache.write().expect("cache lock").insert(key, v);
                    v
                }
            };
            if term.re == f64::NEG_INFINITY {
                return Ok(crate::c64(0.0, 0.0));
            }
            acc += term;
        }
        for k in 0..z.len() {
            for j in (k + 1)..z.len() {
                match pair_log(p, z[k], z[j]) {
                    Some(l) => acc += l,
                    None => return Ok(crate::c64(0.0, 0.0)),
                }
            }
        }
        Ok(acc.exp())
    }
}

// --- instance verification ---------------------------------------------------

fn complex_pair(z: ComplexValue) -> [f64; 2] {
    [z.re, z.im]
}

fn failed_report(
    p: &MBParameterSet<f64>,
    route: Route,
    config: ReportConfig,
    budget: f64,
) -> VerificationReport {
    VerificationReport {
        family: p.family,
        params: p.clone(),
        route,
        lhs: None,
        rhs: None,
        abs_err: f64::INFINITY,
        rel_err: f64::INFINITY,
        budget,
        pass: false,
        config,
    }
}

/// Verifies one instance along one route. Validation failures are reported
/// (`pass = false`, diagnostics in the config echo), not thrown.
pub fn verify_instance(
    p: &MBParameterSet<f64>,
    route: Route,
    config: &SuiteConfig,
    instance: usize,
) -> VerificationReport {
    let contour = config.contour_for(p.n);
    let mut echo = ReportConfig {
        seed: config.seed,
        instance,
        truncation: contour.truncation,
        nodes_per_unit: contour.nodes_per_unit,
        n_max: config.n_max,
        epsilons: config.epsilons.clone(),
        evaluations: 0,
        lhs_error_estimate: 0.0,
        messages: Vec::new(),
    };
    let base_budget = config
        .budget_override(p.family, route)
        .unwrap_or_else(|| SuiteConfig::base_budget(p.n));

    if !Route::applicable(p.family).contains(&route) {
        echo.messages
            .push(format!("route {route} is not applicable to {}", p.family));
        return failed_report(p, route, echo, base_budget);
    }

    let validation: ValidationReport = validate(p, contour.shift);
    if !validation.ok && route != Route::ResidueExtraction {
        echo.messages.extend(validation.messages);
        return failed_report(p, route, echo, base_budget);
    }

    // RHS: the residue-extraction route compares against the reduction
    // prediction, every other route against the family closed form.
    let rhs = match route {
        Route::ResidueExtraction => {
            let sign = RSign::from_family(p.family).expect("checked applicable");
            residue_prediction_reduced(p, sign)
        }
        _ => closed_form_rhs(p),
    };
    let rhs = match rhs {
        Ok(v) => v,
        Err(e) => {
            echo.messages.push(format!("right-hand side failed: {e}"));
            return failed_report(p, route, echo, base_budget);
        }
    };

    let lhs = match route {
        Route::Quadrature => {
            let f = fast_integrand(p);
            match integrate_tensor(f, &contour, p.n, p.family.measure()) {
                Ok(r) => {
                    echo.evaluations = r.evaluations;
                    echo.lhs_error_estimate = r.error_estimate;
                    Ok(r.value)
                }
                Err(e) => Err(e),
            }
        }
        Route::Series => match residue_series(p, config.n_max) {
            Ok(r) => {
                echo.evaluations = r.terms_used;
                echo.lhs_error_estimate = r.tail_estimate;
                Ok(r.value)
            }
            Err(e) => Err(e),
        },
        Route::Determinant => {
            let sign = RSign::from_family(p.family).expect("checked applicable");
            let line_contour = ContourSpec::default_for_dimension(1);
            match r_via_determinant_with_error(p, sign, &line_contour) {
                Ok((v, err, evals)) => {
                    echo.evaluations = evals;
                    echo.lhs_error_estimate = err;
                    Ok(v)
                }
                Err(e) => Err(e),
            }
        }
        Route::ResidueExtraction => {
            let sign = RSign::from_family(p.family).expect("checked applicable");
            let line_contour = ContourSpec::default_for_dimension(1);
            let eps: Vec<f64> = config.epsilons.clone();
            match extract_residue(p, sign, &eps, &line_contour) {
                Ok(r) => {
                    echo.evaluations = r.evaluations;
                    Ok(r.residue)
                }
                Err(e) => Err(e),
            }
        }
    };
    let lhs = match lhs {
        Ok(v) => v,
        Err(e) => {
            echo.messages.push(format!("left-hand side failed: {e}"));
            return failed_report(p, route, echo, base_budget);
        }
    };

    // Budgets: the residue extraction is a low-order fit (5e-3 by design);
    // the series budget adds its honest truncation tail, which dominates at
    // n_max = 60 for power-law terms.
    let budget = match route {
        Route::ResidueExtraction => config
            .budget_override(p.family, route)
            .unwrap_or(5e-3),
        Route::Series => base_budget + echo.lhs_error_estimate / rhs.norm().max(1e-300),
        _ => base_budget,
    };

    let abs_err = (lhs - rhs).norm();
    let rel_err = abs_err / rhs.norm().max(1e-300);
    let pass = if rhs.norm() > 1e-8 {
        rel_err <= budget
    } else {
        abs_err <= budget
    };
    VerificationReport {
        family: p.family,
        params: p.clone(),
        route,
        lhs: Some(complex_pair(lhs)),
        rhs: Some(complex_pair(rhs)),
        abs_err,
        rel_err,
        budget,
        pass,
        config: echo,
    }
}

/// Executes the full matrix (family x N x route x instance); the report list
/// order is the deterministic enumeration order regardless of which worker
/// finishes first.
pub fn run_suite(config: &SuiteConfig) -> Vec<VerificationReport> {
    let mut jobs: Vec<(MBFamily, usize, Route, usize)> = Vec::new();
    for &family in &MBFamily::ALL {
        for &n in &config.n_values {
            if n == 0 || n > 3 {
                continue;
            }
            for &route in Route::applicable(family) {
                // the milne/series sum is a [0, n_max]^N grid; keep it desk-scale
                if route == Route::Series && n > 2 {
                    continue;
                }
                for index in 0..config.instances_per_family {
                    jobs.push((family, n, route, index));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|&(family, n, route, index)| match random_params(family, n, config.seed, index) {
            Ok(p) => verify_instance(&p, route, config, index),
            Err(e) => {
                let placeholder = MBParameterSet::new(
                    family,
                    n,
                    vec![crate::c64(0.5, 0.0); family.arity(n).0],
                    vec![crate::c64(0.5, 0.0); family.arity(n).1],
                    family.arity(n).2.then(|| crate::c64(2.0, 0.0)),
                )
                .expect("placeholder arity");
                let mut echo = ReportConfig {
                    seed: config.seed,
                    instance: index,
                    truncation: 0.0,
                    nodes_per_unit: 0,
                    n_max: config.n_max,
                    epsilons: config.epsilons.clone(),
                    evaluations: 0,
                    lhs_error_estimate: 0.0,
                    messages: vec![format!("sampling failed: {e}")],
                };
                echo.messages.push("placeholder parameters".into());
                failed_report(&placeholder, route, echo, SuiteConfig::base_budget(n))
            }
        })
        .collect()
}

// --- serialization ------------------------------------------------------------

/// `serde_json` formatter that renders every float with 17 significant
/// digits (and non-finite values as null), so serialized reports are
/// byte-stable and round-trip exactly.
struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

/// Serializes any value as a single JSON line with 17-significant-digit
/// floats.
pub fn to_json_line<S: Serialize>(value: &S) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    value.serialize(&mut ser).expect("report serialization");
    String::from_utf8(out).expect("json is utf-8")
}

/// One report per line.
pub fn reports_to_jsonl(reports: &[VerificationReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&to_json_line(r));
        s.push('\n');
    }
    s
}

/// CSV summary: family, N, route, rel_err, pass.
pub fn reports_to_csv(reports: &[VerificationReport]) -> String {
    let mut s = String::from("family,N,route,rel_err,pass\n");
    for r in reports {
        let rel = if r.rel_err.is_finite() {
            format!("{:.16e}", r.rel_err)
        } else {
            "inf".to_string()
        };
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.family, r.params.n, r.route, rel, r.pass
        ));
    }
    s
}
