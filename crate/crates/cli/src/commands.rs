use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Value};
use swlab::closed_forms::bounds_report;
use swlab::diagnostics::{symmetry_residual, CheckRecord};
use swlab::discretization::{fmt17, sample, test_library, FuncSpec};
use swlab::extremal::{perturbed, power_iterate_with, ExtremalOptions, TraceRow};
use swlab::operators::KernelOperator;
use swlab::sobolev::{certified_bound, test_functions, ws_ratio};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::error::CliError;
use crate::suites::{run_suite, select, SuiteContext};

/// What a command produced: the JSON document and whether it counts as a pass.
pub struct Outcome {
    pub document: Value,
    pub passed: bool,
}

fn document(command: &str, body: Value) -> Value {
    let mut doc = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    if let (Some(d), Value::Object(b)) = (doc.as_object_mut(), body) {
        d.extend(b);
    }
    doc
}

pub fn validate(run: &RunConfig) -> Result<Outcome, CliError> {
    let report = run.admissibility()?;
    let (n, lambda, alpha, beta, p, r) = run.raw_tuple()?;
    let passed = report.valid;
    let body = json!({
        "tuple": { "n": n, "lambda": lambda, "alpha": alpha, "beta": beta, "p": p, "r": r },
        "report": report,
    });
    Ok(Outcome {
        document: document("validate", body),
        passed,
    })
}

pub fn bounds(run: &RunConfig) -> Result<Outcome, CliError> {
    let cfg = run.exponent_config()?;
    let report = bounds_report(&cfg)?;
    let body = json!({ "exponents": cfg, "bounds": report });
    Ok(Outcome {
        document: document("bounds", body),
        passed: true,
    })
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "iteration,n_estimate,relative_change,centroid_t,mass_fraction")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.iteration,
            fmt17(r.n_estimate),
            fmt17(r.relative_change),
            fmt17(r.centroid_t),
            fmt17(r.mass_fraction)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// The trace goes to the configured path, or next to the JSON output with a
/// `.trace.csv` suffix; with neither there is no trace file.
pub fn trace_path(run: &RunConfig, out: Option<&Path>) -> Option<PathBuf> {
    run.estimate.trace.clone().or_else(|| out.map(|o| o.with_extension("trace.csv")))
}

pub fn estimate(run: &RunConfig, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let cfg = run.exponent_config()?;
    let est = &run.estimate;
    let spec = run.grid_or_default(cfg.n);
    let grid = Arc::new(spec.build()?);
    let op = KernelOperator::new(cfg, grid.clone())?;
    let init = est.init.clone().unwrap_or_else(|| {
        let mut c = vec![0.5];
        c.extend(std::iter::repeat_n(0.0, cfg.n as usize - 1));
        c.push(1.0);
        FuncSpec::gaussian(&c, 1.0)
    });
    init.validate(grid.dim())
        .map_err(|e| CliError::Usage(format!("estimate.init: {e}")))?;
    let mut f0 = sample(&init, &grid);
    if est.perturbation > 0.0 {
        f0 = perturbed(&f0, est.perturbation, seed)?;
    }
    let opts = ExtremalOptions {
        max_iter: est.max_iter,
        tol: est.tol,
        anderson: est.anderson,
    };
    let res = power_iterate_with(&op, f0, opts)?;
    let bounds = bounds_report(&cfg)?;

    let library: Vec<Value> = test_library(cfg.n)
        .into_iter()
        .map(|(name, s)| {
            let q = op.rayleigh(&sample(&s, &grid)).unwrap_or(f64::NAN);
            json!({ "name": name, "rayleigh": q })
        })
        .collect();
    let library_max = library
        .iter()
        .filter_map(|v| v["rayleigh"].as_f64())
        .fold(0.0, f64::max);
    let symmetry = symmetry_residual(&res.f_star, cfg.p).ok();

    let trace = trace_path(run, out);
    if let Some(path) = &trace {
        write_trace(path, &res.trace)?;
    }
    let body = json!({
        "exponents": cfg,
        "grid": spec,
        "seed": seed,
        "options": opts,
        "n_est": res.n_est,
        "converged": res.converged,
        "iterations": res.iterations,
        "final_change": res.trace.last().map(|r| r.relative_change),
        "warnings": res.warnings,
        "bounds": { "lower": bounds.lower, "upper": bounds.upper },
        "sandwich": {
            "library_max_rayleigh": library_max,
            "library_below_estimate": library_max <= res.n_est,
            "estimate_below_upper": res.n_est <= bounds.upper,
        },
        "library": library,
        "symmetry": symmetry,
        "trace": trace,
    });
    Ok(Outcome {
        document: document("estimate", body),
        passed: res.converged,
    })
}

pub fn check(run: &RunConfig, seed: u64, suite_flag: Option<&str>) -> Result<Outcome, CliError> {
    let names: Vec<String> = match suite_flag {
        Some(s) => vec![s.to_string()],
        None => run.check.suites.clone().unwrap_or_else(|| vec!["all".into()]),
    };
    let suites = select(&names)?;
    let cfg = run.exponent_config()?;
    let ctx = SuiteContext { run, cfg, seed };
    let mut records: Vec<CheckRecord> = Vec::new();
    for s in &suites {
        records.extend(run_suite(*s, &ctx));
    }
    let passed = records.iter().all(CheckRecord::passed);
    let failed: Vec<&str> = records.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    let body = json!({
        "exponents": cfg,
        "seed": seed,
        "suites": suites,
        "records": records,
        "failed": failed,
        "passed": passed,
    });
    Ok(Outcome {
        document: document("check", body),
        passed,
    })
}

pub fn sobolev(run: &RunConfig) -> Result<Outcome, CliError> {
    let params = run
        .sobolev
        .as_ref()
        .ok_or_else(|| CliError::Usage("config has no `sobolev` section".into()))?;
    let p = params.p.value()?;
    let (n, a1, b1) = (params.n, params.alpha1, params.beta1);
    let bound = certified_bound(n, p, a1, b1)?;
    let opts = params.quadrature.unwrap_or_default();
    let functions = params.functions.clone().unwrap_or_else(|| test_functions(n));
    let mut reports = Vec::new();
    let mut scale = Vec::new();
    let mut passed = true;
    for u in &functions {
        let rep = ws_ratio(u, n, p, a1, b1, &opts)?;
        let stretched = ws_ratio(&u.clone().scaled(params.tau, 0.0), n, p, a1, b1, &opts)?;
        let drift = (stretched.ratio / rep.ratio - 1.0).abs();
        passed &= rep.within_bound && drift <= 1e-2;
        scale.push(json!({ "tau": params.tau, "ratio": stretched.ratio, "relative_change": drift }));
        reports.push(rep);
    }
    let body = json!({
        "n": n, "p": p, "alpha1": a1, "beta1": b1,
        "certified_bound": bound,
        "reports": reports,
        "scale_invariance": scale,
        "passed": passed,
    });
    Ok(Outcome {
        document: document("sobolev", body),
        passed,
    })
}
