//! Discrete Riesz and weighted Stein-Weiss operators, weighted norms, the
//! bilinear functional and the duality gap.

pub mod cell;
mod kernel;

pub use kernel::{KernelCore, KernelOptions, MAX_TABLE};

use std::sync::Arc;

use crate::closed_forms::tail_power_law;
use crate::discretization::{Field, HalfSpaceGrid};
use crate::error::{Error, Result};
use crate::exponents::ExponentConfig;
use crate::quad::compensated_sum;

/// Per-node cell averages of `t^(-a)`.
pub fn row_weights(grid: &HalfSpaceGrid, a: f64) -> Vec<f64> {
    let rows: Vec<f64> = (0..grid.nt).map(|j| grid.row_power_average(j, a)).collect();
    (0..grid.len()).map(|i| rows[grid.row(i)]).collect()
}

/// The weighted operator `K_{alpha,beta} f(Y) = z^-beta int f(X) t^-alpha |X-Y|^-lambda dX`
/// on a single grid, together with its adjoint `K_{beta,alpha}`.
///
/// The weights `t^-alpha` and `z^-beta` enter as t-row cell averages on both
/// sides, which keeps the discrete adjoint identity exact.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    pub cfg: ExponentConfig,
    pub core: Arc<KernelCore>,
    src: Vec<f64>,
    tgt: Vec<f64>,
}

impl KernelOperator {
    pub fn new(cfg: ExponentConfig, grid: Arc<HalfSpaceGrid>) -> Result<Self> {
        let core = Arc::new(KernelCore::new(grid, cfg.lambda)?);
        Self::from_core(cfg, core)
    }

    /// Reuses an assembled kernel; `cfg.lambda` must match.
    pub fn from_core(cfg: ExponentConfig, core: Arc<KernelCore>) -> Result<Self> {
        if core.lambda != cfg.lambda {
            return Err(Error::InvalidArgument(format!(
                "kernel assembled for lambda = {}, config has {}",
                core.lambda, cfg.lambda
            )));
        }
        if core.grid.n != cfg.n {
            return Err(Error::InvalidArgument(format!(
                "grid has n = {}, config has n = {}",
                core.grid.n, cfg.n
            )));
        }
        let src = row_weights(&core.grid, cfg.alpha);
        let tgt = row_weights(&core.grid, cfg.beta);
        Ok(Self { cfg, core, src, tgt })
    }

    pub fn grid(&self) -> &Arc<HalfSpaceGrid> {
        &self.core.grid
    }

    /// Discrete `t^-alpha` used on the source side.
    pub fn source_weights(&self) -> &[f64] {
        &self.src
    }

    /// Discrete `z^-beta` used on the target side.
    pub fn target_weights(&self) -> &[f64] {
        &self.tgt
    }

    fn check(&self, f: &Field) -> Result<()> {
        if !Arc::ptr_eq(&f.grid, &self.core.grid) && *f.grid != *self.core.grid {
            return Err(Error::InvalidArgument("field lives on a different grid".into()));
        }
        Ok(())
    }

    /// `K_{alpha,beta} f`.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        self.check(f)?;
        Ok(self.apply_values(&f.values))
    }

    pub(crate) fn apply_values(&self, f: &[f64]) -> Field {
        let w = &self.core.grid.weights;
        let h: Vec<f64> = f.iter().zip(w).zip(&self.src).map(|((v, w), a)| v * w * a).collect();
        let mut out = self.core.convolve(&h);
        out.iter_mut().zip(&self.tgt).for_each(|(o, b)| *o *= b);
        Field {
            grid: self.core.grid.clone(),
            values: out,
            symmetry_hint: Default::default(),
        }
    }

    /// `K_{beta,alpha} g`, the adjoint of [`apply`](Self::apply).
    pub fn apply_adjoint(&self, g: &Field) -> Result<Field> {
        self.check(g)?;
        Ok(self.apply_adjoint_values(&g.values))
    }

    pub(crate) fn apply_adjoint_values(&self, g: &[f64]) -> Field {
        let w = &self.core.grid.weights;
        let h: Vec<f64> = g.iter().zip(w).zip(&self.tgt).map(|((v, w), b)| v * w * b).collect();
        let mut out = self.core.convolve(&h);
        out.iter_mut().zip(&self.src).for_each(|(o, a)| *o *= a);
        Field {
            grid: self.core.grid.clone(),
            values: out,
            symmetry_hint: Default::default(),
        }
    }

    /// `sum_i w_i g_i (K f)_i`, the discrete double integral.
    pub fn functional(&self, f: &Field, g: &Field) -> Result<f64> {
        self.check(g)?;
        let kf = self.apply(f)?;
        Ok(inner(&kf, g))
    }

    /// `||K f||_q / ||f||_p` with unweighted norms.
    pub fn rayleigh(&self, f: &Field) -> Result<f64> {
        let nf = weighted_norm(f, 0.0, self.cfg.p)?;
        if nf == 0.0 {
            return Err(Error::ZeroField);
        }
        let kf = self.apply(f)?;
        Ok(weighted_norm(&kf, 0.0, self.cfg.q)? / nf)
    }

    /// `1 - <g, K f> / (||g||_r ||K f||_q)`.
    pub fn duality_gap_with(&self, f: &Field, g: &Field) -> Result<f64> {
        let kf = self.apply(f)?;
        let num = inner(&kf, g);
        let den = weighted_norm(g, 0.0, self.cfg.r)? * weighted_norm(&kf, 0.0, self.cfg.q)?;
        if den == 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(1.0 - num / den)
    }

    /// Gap at the Hölder-optimal partner `g = (K f)^(q-1)`; zero up to
    /// rounding for every nonnegative `f`.
    pub fn duality_gap(&self, f: &Field) -> Result<f64> {
        let g = self.dual_partner(f)?;
        let num = self.functional(f, &g)?;
        let den = weighted_norm(f, 0.0, self.cfg.p)? * weighted_norm(&g, 0.0, self.cfg.r)? * self.rayleigh(f)?;
        Ok(1.0 - num / den)
    }

    /// `(K f)^(q-1)`.
    pub fn dual_partner(&self, f: &Field) -> Result<Field> {
        if f.values.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("duality partner needs f >= 0".into()));
        }
        let kf = self.apply(f)?;
        let e = self.cfg.q - 1.0;
        Ok(kf.map(|v| v.powf(e)))
    }

    /// Rough size of the part of `||K f||_q` lost to the box truncation: the
    /// weighted mass of `f` times the `L^q` norm of the far-field profile
    /// `z^-beta |Y|^-lambda` outside the largest inscribed half ball,
    /// with the distance halved to account for the support of `f`.
    pub fn tail_estimate(&self, f: &Field) -> Result<f64> {
        let g = &self.core.grid;
        let mass = compensated_sum(
            f.values
                .iter()
                .zip(&g.weights)
                .zip(&self.src)
                .map(|((v, w), a)| v.abs() * w * a),
        );
        let radius = g.x_extent.min(g.t_max);
        let law = tail_power_law(g.n, self.cfg.beta * self.cfg.q, self.cfg.lambda * self.cfg.q)?;
        Ok(mass * (law.at(radius / 2.0)).powf(1.0 / self.cfg.q))
    }
}

/// `E_lambda f` on the grid of `f`, reusing `core` when supplied.
#[allow(non_snake_case)]
pub fn apply_E(f: &Field, lambda: f64) -> Result<Field> {
    let core = KernelCore::new(f.grid.clone(), lambda)?;
    Ok(apply_E_with(&core, f))
}

#[allow(non_snake_case)]
pub fn apply_E_with(core: &KernelCore, f: &Field) -> Field {
    let h: Vec<f64> = f.values.iter().zip(&f.grid.weights).map(|(v, w)| v * w).collect();
    Field {
        grid: f.grid.clone(),
        values: core.convolve(&h),
        symmetry_hint: Default::default(),
    }
}

/// `K_{alpha,beta} f` assembled from scratch.
#[allow(non_snake_case)]
pub fn apply_K(f: &Field, cfg: &ExponentConfig) -> Result<Field> {
    KernelOperator::new(*cfg, f.grid.clone())?.apply(f)
}

/// `||t^e f||_p = (sum t^(e p) |f|^p w)^(1/p)`, with `t^(e p)` averaged over
/// each t-row.
pub fn weighted_norm(f: &Field, weight_exp: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("norm exponent p = {p} must be >= 1")));
    }
    let g = &f.grid;
    let rows: Vec<f64> = (0..g.nt)
        .map(|j| g.row_power_average(j, -weight_exp * p))
        .collect();
    let s = compensated_sum(
        f.values
            .iter()
            .enumerate()
            .map(|(i, v)| v.abs().powf(p) * g.weights[i] * rows[g.row(i)]),
    );
    Ok(s.powf(1.0 / p))
}

/// `sum_i w_i a_i b_i`.
pub fn inner(a: &Field, b: &Field) -> f64 {
    compensated_sum(
        a.values
            .iter()
            .zip(&b.values)
            .zip(&a.grid.weights)
            .map(|((x, y), w)| x * y * w),
    )
}

/// The double integral `int int f(X) g(Y) t^-alpha |X-Y|^-lambda z^-beta`.
pub fn functional_bilinear(f: &Field, g: &Field, cfg: &ExponentConfig) -> Result<f64> {
    KernelOperator::new(*cfg, f.grid.clone())?.functional(f, g)
}

pub fn rayleigh(f: &Field, cfg: &ExponentConfig) -> Result<f64> {
    KernelOperator::new(*cfg, f.grid.clone())?.rayleigh(f)
}

pub fn duality_gap(f: &Field, cfg: &ExponentConfig) -> Result<f64> {
    KernelOperator::new(*cfg, f.grid.clone())?.duality_gap(f)
}
