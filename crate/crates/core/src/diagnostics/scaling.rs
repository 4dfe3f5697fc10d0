use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::discretization::{sample, FuncSpec, GridSpec};
use crate::error::{Error, Result};
use crate::exponents::ExponentConfig;
use crate::operators::{weighted_norm, KernelOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancies {
    pub norm_f: f64,
    pub norm_g: f64,
    pub functional: f64,
}

impl Discrepancies {
    pub fn max(&self) -> f64 {
        self.norm_f.max(self.norm_g).max(self.functional)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub tau: f64,
    /// `f^tau` on the grid stretched by `tau`.
    pub adapted: Discrepancies,
    /// `f^tau` on the original grid.
    pub fixed: Discrepancies,
}

struct Values {
    nf: f64,
    ng: f64,
    functional: f64,
}

fn evaluate(f: &FuncSpec, g: &FuncSpec, cfg: &ExponentConfig, spec: &GridSpec) -> Result<Values> {
    let grid = Arc::new(spec.build()?);
    let op = KernelOperator::new(*cfg, grid.clone())?;
    let fs = sample(f, &grid);
    let gs = sample(g, &grid);
    Ok(Values {
        nf: weighted_norm(&fs, 0.0, cfg.p)?,
        ng: weighted_norm(&gs, 0.0, cfg.r)?,
        functional: op.functional(&fs, &gs)?,
    })
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Dilation invariance of `||f||_p`, `||g||_r` and `<g, K f>` under
/// `f^tau(X) = tau^(-(n+1)/p) f(X / tau)` and the matching `g^tau`.
pub fn scaling_check(
    f_spec: &FuncSpec,
    g_spec: &FuncSpec,
    tau: f64,
    cfg: &ExponentConfig,
    grid: &GridSpec,
) -> Result<ScalingReport> {
    if !(0.25..=4.0).contains(&tau) {
        return Err(Error::InvalidArgument(format!("tau = {tau} outside [0.25, 4]")));
    }
    let d = cfg.dim();
    let ft = f_spec.clone().scaled(tau, d / cfg.p);
    let gt = g_spec.clone().scaled(tau, d / cfg.r);
    let base = evaluate(f_spec, g_spec, cfg, grid)?;
    let stretched = GridSpec {
        x_extent: grid.x_extent * tau,
        t_max: grid.t_max * tau,
        ..*grid
    };
    let a = evaluate(&ft, &gt, cfg, &stretched)?;
    let b = evaluate(&ft, &gt, cfg, grid)?;
    let cmp = |v: &Values| Discrepancies {
        norm_f: rel(base.nf, v.nf),
        norm_g: rel(base.ng, v.ng),
        functional: rel(base.functional, v.functional),
    };
    Ok(ScalingReport {
        tau,
        adapted: cmp(&a),
        fixed: cmp(&b),
    })
}
