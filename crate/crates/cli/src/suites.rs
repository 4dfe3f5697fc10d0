use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use swlab::closed_forms::oracle::{hardy_integrand, hardy_monte_carlo, hardy_quadrature, HardyIntegral};
use swlab::closed_forms::{hardy_A_supremum, hardy_constants, representation_constant, HardySide};
use swlab::diagnostics::{
    hyperbolic_check, kelvin_check, monotonicity_violation, scaling_check, symmetry_residual, BallGridSpec,
    CheckRecord, CheckStatus,
};
use swlab::discretization::{sample, test_library, FuncSpec, GridSpec};
use swlab::extremal::{perturbed, power_iterate_with, ExtremalOptions};
use swlab::operators::KernelOperator;
use swlab::sobolev::representation_check;
use swlab::ExponentConfig;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Duality,
    Kelvin,
    Scaling,
    Symmetry,
    Representation,
    Hardy,
    Hyperbolic,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Duality,
        Suite::Kelvin,
        Suite::Scaling,
        Suite::Symmetry,
        Suite::Representation,
        Suite::Hardy,
        Suite::Hyperbolic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Kelvin => "kelvin",
            Suite::Scaling => "scaling",
            Suite::Symmetry => "symmetry",
            Suite::Representation => "representation",
            Suite::Hardy => "hardy",
            Suite::Hyperbolic => "hyperbolic",
        }
    }

    fn parse(name: &str) -> Option<Self> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Resolves a comma-separated selection (`all` expands to every suite).
/// An empty selection is a usage error.
pub fn select(names: &[String]) -> Result<Vec<Suite>, CliError> {
    let mut out = Vec::new();
    for raw in names.iter().flat_map(|s| s.split(',')) {
        let name = raw.trim();
        if name.is_empty() {
            continue;
        }
        let picked: Vec<Suite> = if name == "all" {
            Suite::ALL.to_vec()
        } else {
            vec![Suite::parse(name).ok_or_else(|| CliError::Usage(format!("unknown suite `{name}`")))?]
        };
        for s in picked {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty suite selection".into()));
    }
    Ok(out)
}

/// A point with `x = (x, 0, ..)` and height `t` in `n + 1` dimensions.
fn at(n: u32, x: f64, t: f64) -> Vec<f64> {
    let mut c = vec![x];
    c.extend(std::iter::repeat_n(0.0, n as usize - 1));
    c.push(t);
    c
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Passes only when `value < bound`.
fn strictly_below(name: String, inputs: serde_json::Value, value: f64, bound: f64) -> CheckRecord {
    CheckRecord {
        name,
        inputs,
        value,
        tolerance: bound,
        status: if value < bound { CheckStatus::Pass } else { CheckStatus::Fail },
    }
}

fn failed(name: String, reason: &str) -> CheckRecord {
    CheckRecord {
        name,
        inputs: json!({ "error": reason }),
        value: f64::NAN,
        tolerance: 0.0,
        status: CheckStatus::Fail,
    }
}

pub struct SuiteContext<'a> {
    pub run: &'a RunConfig,
    pub cfg: ExponentConfig,
    pub seed: u64,
}

/// Runs one suite. A suite that cannot run on the given exponents yields a
/// single failed record carrying the reason.
pub fn run_suite(suite: Suite, ctx: &SuiteContext) -> Vec<CheckRecord> {
    log::info!("running suite {}", suite.name());
    let out = match suite {
        Suite::Duality => duality(ctx),
        Suite::Kelvin => kelvin(ctx),
        Suite::Scaling => scaling(ctx),
        Suite::Symmetry => symmetry(ctx),
        Suite::Representation => representation(ctx),
        Suite::Hardy => hardy(ctx),
        Suite::Hyperbolic => hyperbolic(ctx),
    };
    out.unwrap_or_else(|e| vec![failed(format!("{}.error", suite.name()), &e.to_string())])
}

fn duality(ctx: &SuiteContext) -> swlab::Result<Vec<CheckRecord>> {
    let spec = ctx.run.grid_or_default(ctx.cfg.n);
    let grid = Arc::new(spec.build()?);
    let op = KernelOperator::new(ctx.cfg, grid.clone())?;
    let lib = test_library(ctx.cfg.n);
    let count = ctx.run.check.duality_fields.unwrap_or(10);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let (name, base) = &lib[k % lib.len()];
        let seed = ctx.seed.wrapping_add(k as u64);
        let f = perturbed(&sample(base, &grid), 0.9, seed)?;
        let gap = op.duality_gap(&f)?;
        out.push(CheckRecord::at_most(
            format!("duality.gap[{k}]"),
            json!({ "base": name, "seed": seed, "amplitude": 0.9 }),
            gap.abs(),
            1e-10,
        ));
    }
    Ok(out)
}

fn kelvin(ctx: &SuiteContext) -> swlab::Result<Vec<CheckRecord>> {
    let n = ctx.cfg.n;
    let half = ctx.run.check.kelvin_half.unwrap_or(GridSpec {
        n,
        x_extent: 4.0,
        t_max: 5.0,
        nx: 64,
        nt: 64,
        grading: 2.0,
    });
    let ball = ctx.run.check.kelvin_ball.unwrap_or(BallGridSpec { radial: 24, angular: 48 });
    let f = FuncSpec::gaussian(&at(n, 0.0, 1.0), 0.7);
    let g = FuncSpec::gaussian(&at(n, 0.3, 1.2), 0.8);
    let base = kelvin_check(&f, &g, &ctx.cfg, &half, &ball)?;
    let fine_half = GridSpec {
        nx: 2 * half.nx,
        nt: 2 * half.nt,
        ..half
    };
    let fine = kelvin_check(&f, &g, &ctx.cfg, &fine_half, &ball.doubled())?;
    let inputs = json!({ "half": half, "ball": ball });
    Ok(vec![
        CheckRecord::at_most("kelvin.functional", inputs.clone(), base.functional_discrepancy, 0.02),
        CheckRecord::at_most("kelvin.norm_f", inputs.clone(), base.norm_discrepancy_f, 0.02),
        CheckRecord::at_most("kelvin.norm_g", inputs.clone(), base.norm_discrepancy_g, 0.02),
        strictly_below(
            "kelvin.refinement".into(),
            json!({ "half": fine_half, "ball": ball.doubled(), "coarse": base.functional_discrepancy }),
            fine.functional_discrepancy / base.functional_discrepancy,
            1.0,
        ),
    ])
}

fn scaling(ctx: &SuiteContext) -> swlab::Result<Vec<CheckRecord>> {
    let n = ctx.cfg.n;
    let grid = ctx.run.check.scaling_grid.unwrap_or(GridSpec {
        n,
        x_extent: 8.0,
        t_max: 8.0,
        nx: if n == 1 { 128 } else { 32 },
        nt: if n == 1 { 128 } else { 32 },
        grading: 2.0,
    });
    let f = FuncSpec::gaussian(&at(n, 0.0, 1.0), 0.7);
    let g = FuncSpec::gaussian(&at(n, 0.3, 1.2), 0.8);
    let mut out = Vec::new();
    for tau in [0.5, 2.0] {
        let rep = scaling_check(&f, &g, tau, &ctx.cfg, &grid)?;
        let inputs = json!({ "tau": tau, "grid": grid });
        out.push(CheckRecord::at_most(format!("scaling.adapted[tau={tau}]"), inputs.clone(), rep.adapted.max(), 5e-3));
        out.push(CheckRecord::at_most(format!("scaling.fixed[tau={tau}]"), inputs, rep.fixed.max(), 5e-3));
    }
    Ok(out)
}

fn symmetry(ctx: &SuiteContext) -> swlab::Result<Vec<CheckRecord>> {
    let n = ctx.cfg.n;
    let spec = ctx.run.grid_or_default(n);
    let grid = Arc::new(spec.build()?);
    let op = KernelOperator::new(ctx.cfg, grid.clone())?;
    // lopsided in x: a main bump right of the axis and a small one far left
    let init = FuncSpec::Sum {
        terms: vec![
            FuncSpec::gaussian(&at(n, 0.8, 1.0), 0.8),
            FuncSpec::gaussian(&at(n, -1.5, 0.7), 0.5).times(0.5),
        ],
    };
    // N is flat along translations, so the position of the maximizer settles
    // long after N does; a tight tolerance lets it reach the axis
    let opts = ExtremalOptions {
        max_iter: 3000,
        tol: 1e-11,
        ..ExtremalOptions::default()
    };
    let res = power_iterate_with(&op, sample(&init, &grid), opts)?;
    let sym = symmetry_residual(&res.f_star, ctx.cfg.p)?;
    let mono = monotonicity_violation(&res.f_star, sym.center)?;
    let inputs = json!({ "grid": spec, "iterations": res.iterations, "n_est": res.n_est, "center": sym.center });
    let last = res.trace.last().map_or(f64::INFINITY, |r| r.relative_change);
    Ok(vec![
        CheckRecord::at_most("symmetry.converged", inputs.clone(), last, opts.tol),
        CheckRecord::at_most("symmetry.residual", inputs.clone(), sym.residual, 1e-3),
        CheckRecord::at_most("symmetry.monotonicity", inputs, mono, 1e-3),
    ])
}

fn representation(ctx: &SuiteContext) -> swlab::Result<Vec<CheckRecord>> {
    let grid = ctx.run.check.representation_grid.unwrap_or(GridSpec {
        n: 1,
        x_extent: 4.0,
        t_max: 4.0,
        nx: 128,
        nt: 128,
        grading: 1.0,
    });
    let u = FuncSpec::cutoff(&[0.0, 2.0], 1.5, 1.0);
    let mut probes: Vec<Vec<f64>> = [
        [0.0, 2.0],
        [0.5, 1.5],
        [-0.4, 2.6],
        [0.8, 2.4],
        [-1.0, 1.8],
        [0.2, 0.7],
        [1.0, 2.9],
        [-0.6, 1.0],
        [0.0, 3.3],
        [0.9, 1.1],
    ]
    .iter()
    .map(|p| p.to_vec())
    .collect();
    probes.push(vec![3.5, 3.5]);
    let rep = representation_check(&u, &probes, &grid)?;
    let mut out = vec![CheckRecord::at_most(
        "representation.constant_2d",
        json!({ "d": 2 }),
        (representation_constant(2) - std::f64::consts::PI).abs(),
        1e-12,
    )];
    let (far, interior) = rep.probes.split_last().expect("probe list is not empty");
    for (k, pr) in interior.iter().enumerate() {
        out.push(CheckRecord::at_most(
            format!("representation.probe[{k}]"),
            json!({ "point": pr.point, "exact": pr.exact, "represented": pr.represented, "grid": grid }),
            pr.error,
            1e-2,
        ));
    }
    out.push(CheckRecord::at_most(
        "representation.far_probe",
        json!({ "point": far.point, "represented": far.represented, "peak": rep.peak }),
        far.represented.abs() / rep.peak,
        1e-3,
    ));
    Ok(out)
}

fn hardy(ctx: &SuiteContext) -> swlab::Result<Vec<CheckRecord>> {
    let cfg = &ctx.cfg;
    let h = hardy_constants(cfg)?;
    let samples = ctx.run.check.mc_samples.unwrap_or(1_000_000);
    let mut out = Vec::new();
    for (side, label) in [(HardySide::A2, "A2"), (HardySide::A3, "A3")] {
        let reference = hardy_A_supremum(cfg, side, 1.0)?;
        for radius in [0.5, 2.0, 10.0] {
            let v = hardy_A_supremum(cfg, side, radius)?;
            out.push(CheckRecord::at_most(
                format!("hardy.radius_invariance.{label}[R={radius}]"),
                json!({ "reference": reference, "value": v }),
                rel(v, reference),
                1e-10,
            ));
        }
    }
    for which in HardyIntegral::ALL {
        let law = match which {
            HardyIntegral::C1 => h.c1,
            HardyIntegral::C2 => h.c2,
            HardyIntegral::C3 => h.c3,
            HardyIntegral::C4 => h.c4,
        };
        let label = serde_json::to_value(which).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        for radius in [0.5, 1.0, 2.0] {
            let exact = law.at(radius);
            if cfg.n <= 2 {
                let quad = hardy_quadrature(cfg, which, radius)?;
                out.push(CheckRecord::at_most(
                    format!("hardy.quadrature.{label}[R={radius}]"),
                    json!({ "closed_form": exact, "quadrature": quad }),
                    rel(quad, exact),
                    5e-3,
                ));
            }
            let (sigma, _, _) = hardy_integrand(cfg, which);
            if samples > 0 && 2.0 * sigma < 1.0 {
                let seed = ctx.seed ^ ((which as u64) << 32) ^ radius.to_bits();
                let mc = hardy_monte_carlo(cfg, which, radius, samples, seed)?;
                out.push(CheckRecord::at_most(
                    format!("hardy.monte_carlo.{label}[R={radius}]"),
                    json!({ "closed_form": exact, "estimate": mc.estimate, "stderr": mc.stderr, "samples": samples }),
                    (mc.estimate - exact).abs() / mc.stderr,
                    3.0,
                ));
            }
        }
    }
    Ok(out)
}

fn hyperbolic(ctx: &SuiteContext) -> swlab::Result<Vec<CheckRecord>> {
    let n = ctx.cfg.n;
    let spec = ctx.run.grid_or_default(n);
    let f = FuncSpec::gaussian(&at(n, 0.0, 1.0), 0.7);
    let g = FuncSpec::gaussian(&at(n, 0.3, 1.2), 0.8);
    let rep = hyperbolic_check(&f, &g, &ctx.cfg, &spec)?;
    Ok(vec![CheckRecord::at_most(
        "hyperbolic.functional",
        json!({ "grid": spec, "half_space": rep.half_space, "hyperbolic": rep.hyperbolic }),
        rep.discrepancy,
        1e-10,
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        assert_eq!(select(&["kelvin".into()]).unwrap(), vec![Suite::Kelvin]);
        assert_eq!(select(&["hardy, duality,hardy".into()]).unwrap(), vec![Suite::Hardy, Suite::Duality]);
        assert_eq!(select(&["all".into()]).unwrap().len(), 7);
        assert!(matches!(select(&[]), Err(CliError::Usage(_))));
        assert!(matches!(select(&[" , ".into()]), Err(CliError::Usage(_))));
        assert!(matches!(select(&["kelvn".into()]), Err(CliError::Usage(_))));
    }
}
