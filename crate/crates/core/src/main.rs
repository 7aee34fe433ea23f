//! Command-line surface for evaluating, verifying, and sweeping the
//! Mellin-Barnes integral families.
//!
//! Exit status: 0 on success, 1 when any verification report fails, 2 on
//! configuration / parse / validation errors. Standard output carries only
//! machine-readable payload (JSON lines or CSV); diagnostics go to standard
//! error. All floating-point output carries 17 significant digits, and every
//! subcommand is bit-reproducible for a fixed `--seed`.

use clap::{Args, Parser, Subcommand};
use mbverify::determinant::{
    extract_residue, residue_prediction_closed_form, residue_prediction_reduced, RSign,
};
use mbverify::model::{
    closed_form_rhs, validate, MBFamily, MBParameterSet,
};
use mbverify::quadrature::{integrate_tensor, ContourSpec};
use mbverify::series::{milne_sum, residue_series};
use mbverify::verify::{
    fast_integrand, reports_to_csv, reports_to_jsonl, run_suite, to_json_line,
    Route, SuiteConfig, VerificationReport,
};
use mbverify::ComplexValue;
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mbverify",
    about = "Numerical verification of Gustafson's u(N) Mellin-Barnes integral identities",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Deterministic seed for anything sampled.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Core truncation height T of the contour rule.
    #[arg(long)]
    truncation: Option<f64>,
    /// Node density per unit height (16-node panels).
    #[arg(long)]
    nodes_per_unit: Option<u32>,
    /// Series truncation per coordinate.
    #[arg(long, default_value_t = 60)]
    n_max: usize,
    /// Pretty-print JSON output.
    #[arg(long)]
    pretty: bool,
    /// Write the payload to a file as well as standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one instance: LHS along a route and the closed-form RHS.
    Eval {
        /// Parameter set: a JSON file path or an inline JSON object.
        #[arg(long)]
        params: String,
        /// Route: quadrature | series | determinant | rhs.
        #[arg(long, default_value = "quadrature")]
        route: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Verify one instance and emit a verification report line.
    Verify {
        #[arg(long)]
        params: String,
        #[arg(long, default_value = "quadrature")]
        route: String,
        /// Relative tolerance override.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Numeric residue of R+/R- at nu = 0 with both closed-form predictions.
    Residue {
        #[arg(long)]
        params: String,
        /// Decreasing positive epsilon list, comma-separated.
        #[arg(long, default_value = "0.2,0.1,0.05")]
        epsilons: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the verification suite matrix (family x N x route x instance).
    Suite {
        /// Restrict to one family.
        #[arg(long)]
        family: Option<String>,
        /// Integration dimensions, comma-separated.
        #[arg(long, default_value = "1,2")]
        n: String,
        /// Instances per (family, N, route) cell.
        #[arg(long, default_value_t = 5)]
        instances: usize,
        /// Relative tolerance override applied to every cell.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Sweep one axis and emit CSV rows (axis, result_re, result_im, error).
    Sweep {
        /// Axis: nu | truncation | n_max | u.
        #[arg(long)]
        axis: String,
        #[arg(long)]
        params: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn load_params(spec: &str) -> Result<MBParameterSet<f64>, String> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec).map_err(|e| format!("cannot read {spec}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("invalid parameter JSON: {e}"))
}

fn emit(payload: &str, out: &Option<PathBuf>) -> Result<(), String> {
    print!("{payload}");
    std::io::stdout().flush().map_err(|e| e.to_string())?;
    if let Some(path) = out {
        std::fs::write(path, payload).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn pretty_json(line: &str) -> String {
    // reformat a compact line; numbers stay textually intact only in the
    // compact form, so pretty mode re-serializes through serde_json::Value
    match serde_json::from_str::<serde_json::Value>(line) {
        Ok(v) => serde_json::to_string_pretty(&v).unwrap_or_else(|_| line.to_string()),
        Err(_) => line.to_string(),
    }
}

fn suite_config(common: &CommonOpts, instances: usize, n_values: Vec<usize>) -> SuiteConfig {
    SuiteConfig {
        seed: common.seed,
        instances_per_family: instances,
        n_values,
        tolerance_overrides: Vec::new(),
        n_max: common.n_max,
        epsilons: vec![0.2, 0.1, 0.05],
        truncation: common.truncation,
        nodes_per_unit: common.nodes_per_unit,
    }
}

#[derive(Serialize)]
struct EvalOutput {
    lhs: Option<[f64; 2]>,
    rhs: Option<[f64; 2]>,
    error_estimate: f64,
    evaluations: u64,
}

fn cmd_eval(params: &str, route: &str, common: &CommonOpts) -> Result<String, String> {
    let p = load_params(params)?;
    let config = suite_config(common, 1, vec![p.n]);
    let contour = config.contour_for(p.n);

    let rhs = closed_form_rhs(&p).map(|v| [v.re, v.im]).ok();
    let (lhs, error_estimate, evaluations) = match route {
        "rhs" => {
            if rhs.is_none() {
                return Err("closed form has a pole for these parameters".into());
            }
            (None, 0.0, 0)
        }
        "quadrature" => {
            let validation = validate(&p, contour.shift);
            if !validation.ok {
                return Err(validation.messages.join("; "));
            }
            let f = fast_integrand(&p);
            let r = integrate_tensor(f, &contour, p.n, p.family.measure())
                .map_err(|e| e.to_string())?;
            (Some([r.value.re, r.value.im]), r.error_estimate, r.evaluations)
        }
        "series" => {
            let r = residue_series(&p, common.n_max).map_err(|e| e.to_string())?;
            (Some([r.value.re, r.value.im]), r.tail_estimate, r.terms_used)
        }
        "determinant" => {
            let sign = RSign::from_family(p.family)
                .ok_or_else(|| format!("determinant route needs R+/R-, got {}", p.family))?;
            let line = ContourSpec::default_for_dimension(1);
            let (v, err, evals) =
                mbverify::determinant::r_via_determinant_with_error(&p, sign, &line)
                    .map_err(|e| e.to_string())?;
            (Some([v.re, v.im]), err, evals)
        }
        other => return Err(format!("unknown route {other}")),
    };
    Ok(to_json_line(&EvalOutput { lhs, rhs, error_estimate, evaluations }) + "\n")
}

fn cmd_verify(
    params: &str,
    route: &str,
    tol: Option<f64>,
    common: &CommonOpts,
) -> Result<(String, bool), String> {
    let p = load_params(params)?;
    let route = Route::parse(route).ok_or_else(|| format!("unknown route {route}"))?;
    let mut config = suite_config(common, 1, vec![p.n]);
    if let Some(t) = tol {
        config.tolerance_overrides.push((p.family, route, t));
    }
    let report: VerificationReport = mbverify::verify::verify_instance(&p, route, &config, 0);
    let pass = report.pass;
    Ok((to_json_line(&report) + "\n", pass))
}

#[derive(Serialize)]
struct ResidueOutput {
    residue: [f64; 2],
    prediction_reduced: [f64; 2],
    prediction_closed_form: [f64; 2],
    rel_err_reduced: f64,
    rel_err_closed_form: f64,
    condition: f64,
    samples: Vec<ResidueSample>,
    evaluations: u64,
}

#[derive(Serialize)]
struct ResidueSample {
    epsilon: f64,
    value: [f64; 2],
    error_estimate: f64,
}

fn cmd_residue(params: &str, epsilons: &str, _common: &CommonOpts) -> Result<String, String> {
    let p = load_params(params)?;
    let sign = RSign::from_family(p.family)
        .ok_or_else(|| format!("residue extraction needs R+/R-, got {}", p.family))?;
    let eps: Vec<f64> = epsilons
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad epsilon {s}: {e}")))
        .collect::<Result<_, _>>()?;
    let contour = ContourSpec::default_for_dimension(1);
    let ex = extract_residue(&p, sign, &eps, &contour).map_err(|e| e.to_string())?;
    let reduced = residue_prediction_reduced(&p, sign).map_err(|e| e.to_string())?;
    let closed = residue_prediction_closed_form(&p, sign).map_err(|e| e.to_string())?;
    let out = ResidueOutput {
        residue: [ex.residue.re, ex.residue.im],
        prediction_reduced: [reduced.re, reduced.im],
        prediction_closed_form: [closed.re, closed.im],
        rel_err_reduced: (ex.residue - reduced).norm() / reduced.norm().max(1e-300),
        rel_err_closed_form: (ex.residue - closed).norm() / closed.norm().max(1e-300),
        condition: ex.condition,
        samples: ex
            .samples
            .iter()
            .map(|&(epsilon, value, error_estimate)| ResidueSample {
                epsilon,
                value: [value.re, value.im],
                error_estimate,
            })
            .collect(),
        evaluations: ex.evaluations,
    };
    Ok(to_json_line(&out) + "\n")
}

fn cmd_suite(
    family: Option<&str>,
    n: &str,
    instances: usize,
    tol: Option<f64>,
    common: &CommonOpts,
) -> Result<(String, Option<String>, bool), String> {
    let n_values: Vec<usize> = n
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("bad N {s}: {e}")))
        .collect::<Result<_, _>>()?;
    let family_filter = match family {
        Some(name) => Some(
            MBFamily::ALL
                .iter()
                .copied()
                .find(|f| f.name() == name)
                .ok_or_else(|| format!("unknown family {name}"))?,
        ),
        None => None,
    };
    let mut config = suite_config(common, instances, n_values);
    if let Some(t) = tol {
        for &f in &MBFamily::ALL {
            for &r in Route::applicable(f) {
                config.tolerance_overrides.push((f, r, t));
            }
        }
    }
    let mut reports = run_suite(&config);
    if let Some(f) = family_filter {
        reports.retain(|r| r.family == f);
    }
    let all_pass = reports.iter().all(|r| r.pass);
    Ok((reports_to_jsonl(&reports), Some(reports_to_csv(&reports)), all_pass))
}

fn cmd_sweep(
    axis: &str,
    params: &str,
    from: f64,
    to: f64,
    steps: usize,
    common: &CommonOpts,
) -> Result<String, String> {
    if steps < 2 {
        return Err("need at least 2 steps".into());
    }
    let p = load_params(params)?;
    let mut csv = String::from("axis,result_re,result_im,error\n");
    let mut push_row = |x: f64, v: ComplexValue, err: f64| {
        csv.push_str(&format!("{x:.16e},{:.16e},{:.16e},{err:.16e}\n", v.re, v.im));
    };
    let grid: Vec<f64> = (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect();
    match axis {
        "nu" => {
            let sign = RSign::from_family(p.family)
                .ok_or_else(|| format!("nu sweep needs R+/R-, got {}", p.family))?;
            let _ = sign;
            let base = p.alpha_sum() + p.beta_sum();
            for &nu in &grid {
                let shifted = MBParameterSet::new(
                    p.family,
                    p.n,
                    p.alphas.clone(),
                    p.betas.clone(),
                    Some(base + mbverify::c64(nu, 0.0)),
                )
                .map_err(|e| e.to_string())?;
                let rhs = closed_form_rhs(&shifted).map_err(|e| e.to_string())?;
                push_row(nu, rhs, 0.0);
            }
        }
        "truncation" => {
            for &t in &grid {
                let contour = ContourSpec::new(
                    0.0,
                    t,
                    common.nodes_per_unit.unwrap_or_else(|| {
                        ContourSpec::<f64>::default_for_dimension(p.n).nodes_per_unit
                    }),
                )
                .map_err(|e| e.to_string())?;
                let f = fast_integrand(&p);
                let r = integrate_tensor(f, &contour, p.n, p.family.measure())
                    .map_err(|e| e.to_string())?;
                push_row(t, r.value, r.error_estimate);
            }
        }
        "n_max" => {
            for &x in &grid {
                let n_max = x.round().max(0.0) as usize;
                let r = milne_sum(&p, n_max).map_err(|e| e.to_string())?;
                push_row(n_max as f64, r.value, r.tail_estimate);
            }
        }
        "u" => {
            // ratio of the moment integrand to its leading power asymptotics
            // at height u, for the slowest-decaying entry (m = 1, k = N)
            let sign = RSign::from_family(p.family)
                .ok_or_else(|| format!("u sweep needs R+/R-, got {}", p.family))?;
            for &u in &grid {
                if u <= 0.0 {
                    return Err("u must be positive".into());
                }
                let z = sign.closing_direction::<f64>() * u;
                let i_val = mbverify::determinant::moment_integrand(&p, sign, 1, p.n, z)
                    .map_err(|e| e.to_string())?;
                let lead = mbverify::determinant::asymptotic_leading(&p, sign, 1, p.n, u);
                let ratio = i_val / lead;
                push_row(u, ratio, (ratio - mbverify::c64(1.0, 0.0)).norm());
            }
        }
        other => return Err(format!("unknown sweep axis {other} (expected nu | truncation | n_max | u)")),
    }
    Ok(csv)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MBVERIFY_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => return fail("MBVERIFY_THREADS must be a positive integer"),
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Eval { params, route, common } => match cmd_eval(&params, &route, &common) {
            Ok(payload) => {
                let payload = if common.pretty { pretty_json(payload.trim_end()) + "\n" } else { payload };
                match emit(&payload, &common.out) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(e),
                }
            }
            Err(e) => fail(e),
        },
        Command::Verify { params, route, tol, common } => {
            match cmd_verify(&params, &route, tol, &common) {
                Ok((payload, pass)) => {
                    let payload =
                        if common.pretty { pretty_json(payload.trim_end()) + "\n" } else { payload };
                    match emit(&payload, &common.out) {
                        Ok(()) if pass => ExitCode::SUCCESS,
                        Ok(()) => ExitCode::from(1),
                        Err(e) => fail(e),
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Residue { params, epsilons, common } => {
            match cmd_residue(&params, &epsilons, &common) {
                Ok(payload) => {
                    let payload =
                        if common.pretty { pretty_json(payload.trim_end()) + "\n" } else { payload };
                    match emit(&payload, &common.out) {
                        Ok(()) => ExitCode::SUCCESS,
                        Err(e) => fail(e),
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Suite { family, n, instances, tol, common } => {
            match cmd_suite(family.as_deref(), &n, instances, tol, &common) {
                Ok((jsonl, csv, all_pass)) => {
                    if let Err(e) = emit(&jsonl, &None) {
                        return fail(e);
                    }
                    if let (Some(path), Some(csv)) = (&common.out, csv) {
                        if let Err(e) = std::fs::write(path, csv) {
                            return fail(format!("cannot write {}: {e}", path.display()));
                        }
                    }
                    if all_pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Sweep { axis, params, from, to, steps, common } => {
            match cmd_sweep(&axis, &params, from, to, steps, &common) {
                Ok(csv) => match emit(&csv, &common.out) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(e),
                },
                Err(e) => fail(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_inline_and_errors() {
        let inline = r#"{"family":"GustafsonFirst","N":1,"alphas":[[0.5,0],[0.5,0]],"betas":[[0.5,0],[0.5,0]],"a":null}"#;
        assert!(load_params(inline).is_ok());
        assert!(load_params("/nonexistent/params.json").is_err());
        assert!(load_params(r#"{"family":"Nope","N":1,"alphas":[],"betas":[],"a":null}"#).is_err());
    }

    #[test]
    fn eval_rhs_only_has_zero_evaluations() {
        let inline = r#"{"family":"GustafsonFirst","N":1,"alphas":[[0.5,0],[0.5,0]],"betas":[[0.5,0],[0.5,0]],"a":null}"#;
        let common = CommonOpts {
            seed: 42,
            truncation: None,
            nodes_per_unit: None,
            n_max: 60,
            pretty: false,
            out: None,
        };
        let out = cmd_eval(inline, "rhs", &common).unwrap();
        assert!(out.contains("\"evaluations\":0"));
        assert!(out.contains("\"lhs\":null"));
    }

    #[test]
    fn sweep_rejects_unknown_axis() {
        let inline = r#"{"family":"RPlus","N":1,"alphas":[[0.4,0],[0.6,0]],"betas":[[0.5,0]],"a":[2.2,0]}"#;
        let common = CommonOpts {
            seed: 42,
            truncation: None,
            nodes_per_unit: None,
            n_max: 60,
            pretty: false,
            out: None,
        };
        assert!(cmd_sweep("height", inline, 1.0, 2.0, 3, &common).is_err());
    }
}
