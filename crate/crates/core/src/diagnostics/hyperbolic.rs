use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::discretization::{sample, FuncSpec, GridSpec};
use crate::error::{Error, Result};
use crate::exponents::ExponentConfig;
use crate::operators::KernelCore;
use crate::quad::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicReport {
    pub half_space: f64,
    pub hyperbolic: f64,
    pub discrepancy: f64,
    pub forced_alpha: f64,
    pub forced_beta: f64,
}

/// The weights for which `F = f t^((n+1)/p)`, `G = g z^((n+1)/r)` turn the
/// half-space integrand into the hyperbolic one pointwise:
/// `alpha = (n+1)/p' - lambda/2`, `beta = (n+1)/r' - lambda/2`.
pub fn forced_weights(n: u32, lambda: f64, p: f64, r: f64) -> (f64, f64) {
    let d = n as f64 + 1.0;
    (d * (1.0 - 1.0 / p) - 0.5 * lambda, d * (1.0 - 1.0 / r) - 0.5 * lambda)
}

/// Compares `int int f g t^-alpha z^-beta |X-Y|^-lambda` with
/// `int int F G d(w, w')^-lambda dV dV'`, `d = |w - w'| / sqrt(t z)`,
/// `dV = t^-(n+1) dx dt`, on one grid and with the same node weights, the
/// kernel matrix standing in for `|X - Y|^-lambda` on both sides.
pub fn hyperbolic_check(
    f_spec: &FuncSpec,
    g_spec: &FuncSpec,
    cfg: &ExponentConfig,
    grid: &GridSpec,
) -> Result<HyperbolicReport> {
    let (fa, fb) = forced_weights(cfg.n, cfg.lambda, cfg.p, cfg.r);
    if (cfg.alpha - fa).abs() > 1e-10 || (cfg.beta - fb).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "hyperbolic form needs alpha = {fa}, beta = {fb} (got {}, {})",
            cfg.alpha, cfg.beta
        )));
    }
    if grid.n != cfg.n {
        return Err(Error::InvalidArgument("grid dimension differs from config".into()));
    }
    let g = Arc::new(grid.build()?);
    let core = KernelCore::new(g.clone(), cfg.lambda)?;
    let f = sample(f_spec, &g);
    let gv = sample(g_spec, &g);
    let d = cfg.dim();
    let half_l = 0.5 * cfg.lambda;
    let t = |i: usize| g.t_nodes[g.row(i)];

    let h: Vec<f64> = (0..g.len()).map(|i| f.values[i] * t(i).powf(-cfg.alpha) * g.weights[i]).collect();
    let kh = core.convolve(&h);
    let half_space = compensated_sum((0..g.len()).map(|i| gv.values[i] * t(i).powf(-cfg.beta) * g.weights[i] * kh[i]));

    let big_f: Vec<f64> = (0..g.len()).map(|i| f.values[i] * t(i).powf(d / cfg.p)).collect();
    let big_g: Vec<f64> = (0..g.len()).map(|i| gv.values[i] * t(i).powf(d / cfg.r)).collect();
    let h: Vec<f64> = (0..g.len())
        .map(|i| big_f[i] * t(i).powf(half_l) * t(i).powf(-d) * g.weights[i])
        .collect();
    let kh = core.convolve(&h);
    let hyperbolic = compensated_sum(
        (0..g.len()).map(|i| big_g[i] * t(i).powf(half_l) * t(i).powf(-d) * g.weights[i] * kh[i]),
    );
    let discrepancy = if half_space == hyperbolic {
        0.0
    } else {
        (half_space - hyperbolic).abs() / half_space.abs().max(hyperbolic.abs())
    };
    Ok(HyperbolicReport {
        half_space,
        hyperbolic,
        discrepancy,
        forced_alpha: fa,
        forced_beta: fb,
    })
}
