//! Nonlinear power iteration for the sharp constant and the Euler-Lagrange
//! system.
//!
//! Throughout, `f` is normalized in unweighted `L^p` and the weights live in
//! the operator, i.e. the functional is `<g, K_{alpha,beta} f>`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::discretization::{sample, Field, FuncSpec, HalfSpaceGrid};
use crate::error::{Error, Result};
use crate::exponents::{el_exponents, Attainment, ExponentConfig};
use crate::operators::{weighted_norm, KernelOperator};
use crate::quad::compensated_sum;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub n_estimate: f64,
    pub relative_change: f64,
    /// `|f|^p`-weighted mean of `t`.
    pub centroid_t: f64,
    /// Share of `|f|^p` away from the box faces and the bottom layer.
    pub mass_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct ExtremalResult {
    /// Maximizer estimate with `||f||_p = 1`.
    pub f_star: Field,
    /// `(K f_star)^(q-1)`, normalized with `||g||_r = 1`.
    pub g_star: Field,
    pub n_est: f64,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

pub fn normalize(f: &mut Field, p: f64) -> Result<f64> {
    let nrm = weighted_norm(f, 0.0, p)?;
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::Collapse(format!("field norm is {nrm}")));
    }
    f.values.iter_mut().for_each(|v| *v /= nrm);
    Ok(nrm)
}

fn telemetry(f: &Field, p: f64) -> (f64, f64) {
    let g = &f.grid;
    let dx = g.dx();
    let inner_x = g.x_extent - 2.0 * dx;
    let layer = g.t_max / g.nt as f64;
    let mut total = Vec::with_capacity(f.len());
    let mut moment = Vec::with_capacity(f.len());
    let mut inside = Vec::with_capacity(f.len());
    for (i, v) in f.values.iter().enumerate() {
        let m = v.abs().powf(p) * g.weights[i];
        let pt = g.point3(i);
        total.push(m);
        moment.push(m * pt[2]);
        let interior = pt[0].abs() <= inner_x
            && (g.n == 1 || pt[1].abs() <= inner_x)
            && pt[2] >= layer
            && pt[2] <= g.t_max - layer;
        inside.push(if interior { m } else { 0.0 });
    }
    let tot = compensated_sum(total);
    (compensated_sum(moment) / tot, compensated_sum(inside) / tot)
}

/// One sweep of the power map: `f -> normalize([K^T (K f)^(q-1)]^(1/(p-1)))`.
/// Returns the new field and `||K f||_q` of the input.
pub fn power_step(op: &KernelOperator, f: &Field) -> Result<(Field, f64)> {
    let cfg = &op.cfg;
    let kf = op.apply_values(&f.values);
    let n_k = weighted_norm(&kf, 0.0, cfg.q)?;
    let g: Vec<f64> = kf.values.iter().map(|v| v.max(0.0).powf(cfg.q - 1.0)).collect();
    let h = op.apply_adjoint_values(&g);
    let e = 1.0 / (cfg.p - 1.0);
    let mut next = h.map(|v| v.max(0.0).powf(e));
    if next.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Collapse("non-finite iterate".into()));
    }
    normalize(&mut next, cfg.p)?;
    Ok((next, n_k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Anderson mixing depth on the power map; 0 gives the plain iteration.
    pub anderson: usize,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            anderson: DEFAULT_ANDERSON,
        }
    }
}

pub const DEFAULT_ANDERSON: usize = 5;
const POLISH_STEPS: usize = 10;

/// Anderson mixing for a fixed-point map `x -> g(x)`, least squares in the
/// cell-measure inner product.
struct Anderson {
    depth: usize,
    weights: Vec<f64>,
    xs: std::collections::VecDeque<Vec<f64>>,
    gs: std::collections::VecDeque<Vec<f64>>,
}

impl Anderson {
    fn new(depth: usize, weights: Vec<f64>) -> Self {
        Self {
            depth,
            weights,
            xs: Default::default(),
            gs: Default::default(),
        }
    }

    fn reset(&mut self) {
        self.xs.clear();
        self.gs.clear();
    }

    fn mix(&mut self, x: &[f64], g: &[f64]) -> Vec<f64> {
        if self.depth == 0 {
            return g.to_vec();
        }
        self.xs.push_back(x.to_vec());
        self.gs.push_back(g.to_vec());
        if self.xs.len() > self.depth + 1 {
            self.xs.pop_front();
            self.gs.pop_front();
        }
        let m = self.xs.len() - 1;
        if m == 0 {
            return g.to_vec();
        }
        let resid = |k: usize| -> Vec<f64> { self.gs[k].iter().zip(&self.xs[k]).map(|(a, b)| a - b).collect() };
        let f_last = resid(m);
        let df: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                let r = resid(k + 1);
                let q = resid(k);
                r.iter().zip(&q).map(|(a, b)| a - b).collect()
            })
            .collect();
        let dot = |a: &[f64], b: &[f64]| {
            compensated_sum(a.iter().zip(b).zip(&self.weights).map(|((x, y), w)| x * y * w))
        };
        let mut mat = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            rhs[i] = dot(&df[i], &f_last);
            for j in 0..=i {
                let v = dot(&df[i], &df[j]);
                mat[i * m + j] = v;
                mat[j * m + i] = v;
            }
        }
        let trace: f64 = (0..m).map(|i| mat[i * m + i]).sum();
        for i in 0..m {
            mat[i * m + i] += 1e-10 * trace.max(f64::MIN_POSITIVE);
        }
        let Some(gamma) = solve_dense(mat, rhs, m) else {
            self.reset();
            return g.to_vec();
        };
        let mut out = g.to_vec();
        for (k, gk) in gamma.iter().enumerate() {
            for ((o, a), b) in out.iter_mut().zip(&self.gs[k + 1]).zip(&self.gs[k]) {
                *o -= gk * (a - b);
            }
        }
        out
    }
}

/// Gaussian elimination with partial pivoting for a small dense system.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, m: usize) -> Option<Vec<f64>> {
    for c in 0..m {
        let piv = (c..m).max_by(|&i, &j| a[i * m + c].abs().total_cmp(&a[j * m + c].abs()))?;
        if a[piv * m + c].abs() < 1e-300 {
            return None;
        }
        if piv != c {
            for k in 0..m {
                a.swap(c * m + k, piv * m + k);
            }
            b.swap(c, piv);
        }
        for r in c + 1..m {
            let fct = a[r * m + c] / a[c * m + c];
            for k in c..m {
                a[r * m + k] -= fct * a[c * m + k];
            }
            b[r] -= fct * b[c];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|k| a[r * m + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * m + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Power iteration from a closed-form initial guess.
pub fn power_iterate(
    cfg: &ExponentConfig,
    grid: &Arc<HalfSpaceGrid>,
    init: &FuncSpec,
    max_iter: usize,
    tol: f64,
) -> Result<ExtremalResult> {
    let op = KernelOperator::new(*cfg, grid.clone())?;
    init.validate(grid.dim())?;
    let f0 = sample(init, grid);
    power_iterate_with(&op, f0, ExtremalOptions { max_iter, tol, ..Default::default() })
}

/// `f (1 + amplitude xi)` with `xi` uniform on `[-1, 1)`, drawn node by node
/// from a stream seeded with `seed`; `amplitude` must lie in `[0, 1)` so the
/// result stays nonnegative.
pub fn perturbed(f: &Field, amplitude: f64, seed: u64) -> Result<Field> {
    if !(0.0..1.0).contains(&amplitude) {
        return Err(Error::InvalidArgument(format!("perturbation amplitude {amplitude} outside [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = f
        .values
        .iter()
        .map(|v| v * (1.0 + amplitude * (2.0 * rng.gen::<f64>() - 1.0)))
        .collect();
    Field::new(f.grid.clone(), values)
}

/// Power iteration on a prepared operator and initial field.
pub fn power_iterate_with(op: &KernelOperator, init: Field, opts: ExtremalOptions) -> Result<ExtremalResult> {
    let cfg = op.cfg;
    if init.values.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("initial field must be nonnegative".into()));
    }
    let mut warnings = Vec::new();
    if cfg.p >= cfg.q * (1.0 - 1e-12) {
        warnings.push("p = q: extremal functions are not expected to be attained".to_string());
    }
    let watch = cfg.attainment() == Attainment::NotAttainedZeroWeights;
    if watch {
        warnings.push("alpha = beta = 0: concentration watch active".to_string());
    }
    let mut f = init;
    f.values.iter().try_for_each(|v| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("initial field"))
        }
    })?;
    normalize(&mut f, cfg.p).map_err(|_| Error::ZeroField)?;

    let mut trace = Vec::new();
    let mut prev: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;
    let mut n_last = 0.0;
    let mut mixer = Anderson::new(opts.anderson, f.grid.weights.clone());
    // with mixing on, a hit of the tolerance starts a run of plain steps that
    // must all stay below it
    let mut polish: Option<usize> = None;
    let mut best_step = f64::INFINITY;
    for k in 0..opts.max_iter {
        let (plain, n_k) = power_step(op, &f)?;
        let rel = prev.map_or(f64::INFINITY, |p| (n_k - p).abs() / p);
        let (centroid_t, mass_fraction) = telemetry(&f, cfg.p);
        trace.push(TraceRow {
            iteration: k,
            n_estimate: n_k,
            relative_change: rel,
            centroid_t,
            mass_fraction,
        });
        log::debug!("iteration {k}: N = {n_k:.15}, change = {rel:.3e}");
        iterations = k + 1;
        n_last = n_k;
        if rel < opts.tol {
            if opts.anderson == 0 || polish.is_some_and(|c| c + 1 >= POLISH_STEPS) {
                converged = true;
                break;
            }
            polish = Some(polish.map_or(0, |c| c + 1));
        } else if polish.take().is_some() {
            mixer.reset();
        }
        prev = Some(n_k);
        f = if polish.is_some() {
            plain
        } else {
            // mixing acts on u = f^(p-1), where the map ends with the linear
            // K^T and is much closer to affine than in f
            let pm = cfg.p - 1.0;
            let xu: Vec<f64> = f.values.iter().map(|v| v.powf(pm)).collect();
            let gu: Vec<f64> = plain.values.iter().map(|v| v.powf(pm)).collect();
            let step = xu.iter().zip(&gu).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if step > 10.0 * best_step {
                // the mixed iterate lost ground: restart the history
                mixer.reset();
            }
            best_step = best_step.min(step);
            let mut next = plain.clone();
            next.values = mixer.mix(&xu, &gu);
            next.values.iter_mut().for_each(|v| *v = v.max(0.0).powf(1.0 / pm));
            if normalize(&mut next, cfg.p).is_err() {
                mixer.reset();
                plain
            } else {
                next
            }
        };
    }
    if watch {
        if let (Some(first), Some(last)) = (trace.first(), trace.last()) {
            if last.centroid_t < 0.5 * first.centroid_t || last.mass_fraction < 0.9 {
                warnings.push(format!(
                    "iterate drifts towards the boundary or out of the box (centroid t {:.3e} -> {:.3e}, mass fraction {:.3})",
                    first.centroid_t, last.centroid_t, last.mass_fraction
                ));
            }
        }
    }
    if !converged {
        warnings.push(format!("no convergence within {} iterations", opts.max_iter));
    }
    let kf = op.apply_values(&f.values);
    let mut g_star = kf.map(|v| v.max(0.0).powf(cfg.q - 1.0));
    normalize(&mut g_star, cfg.r)?;
    Ok(ExtremalResult {
        f_star: f,
        g_star,
        n_est: n_last,
        trace,
        converged,
        iterations,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElResidual {
    pub r_u: f64,
    pub r_v: f64,
}

impl ElResidual {
    pub fn max(&self) -> f64 {
        self.r_u.max(self.r_v)
    }
}

/// Relative sup-norm defects of
/// `u = t^-alpha int v^kappa z^-beta |X-Y|^-lambda` and
/// `v = z^-beta int u^theta t^-alpha |X-Y|^-lambda`.
pub fn el_residual_with(op: &KernelOperator, u: &Field, v: &Field) -> Result<ElResidual> {
    let el = el_exponents(&op.cfg)?;
    let vk: Vec<f64> = v.values.iter().map(|x| x.max(0.0).powf(el.kappa)).collect();
    let ut: Vec<f64> = u.values.iter().map(|x| x.max(0.0).powf(el.theta)).collect();
    let ru = op.apply_adjoint_values(&vk);
    let rv = op.apply_values(&ut);
    let defect = |a: &[f64], b: &[f64]| {
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let d = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if scale == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / scale
        }
    };
    Ok(ElResidual {
        r_u: defect(&u.values, &ru.values),
        r_v: defect(&v.values, &rv.values),
    })
}

pub fn el_residual(u: &Field, v: &Field, cfg: &ExponentConfig) -> Result<ElResidual> {
    let op = KernelOperator::new(*cfg, u.grid.clone())?;
    el_residual_with(&op, u, v)
}

#[derive(Debug, Clone)]
pub struct ElSolution {
    pub u: Field,
    pub v: Field,
    pub residual: ElResidual,
    pub sweeps: usize,
    pub converged: bool,
    /// Residual after each sweep.
    pub history: Vec<f64>,
}

/// Exact amplitudes for a direction pair: if `K^T(v^kappa) = c_u u` and
/// `K(u^theta) = c_v v`, then `(a u, b v)` solves the system with
/// `a^(theta kappa - 1) = 1 / (c_v^kappa c_u)` and `b = c_v a^theta`.
fn fix_amplitude(op: &KernelOperator, u: &Field, v: &Field) -> Result<(Field, Field)> {
    let el = el_exponents(&op.cfg)?;
    let tk = el.theta * el.kappa;
    if (tk - 1.0).abs() < 1e-12 {
        return Err(Error::Unsupported(
            "theta kappa = 1: the system fixes no amplitude".into(),
        ));
    }
    let ratio = |num: &Field, den: &Field| {
        let a: Vec<f64> = num.values.iter().zip(&den.values).map(|(x, y)| x * y).collect();
        let b: Vec<f64> = den.values.iter().map(|y| y * y).collect();
        compensated_sum(a) / compensated_sum(b)
    };
    let vk: Vec<f64> = v.values.iter().map(|x| x.max(0.0).powf(el.kappa)).collect();
    let ut: Vec<f64> = u.values.iter().map(|x| x.max(0.0).powf(el.theta)).collect();
    let c_u = ratio(&op.apply_adjoint_values(&vk), u);
    let c_v = ratio(&op.apply_values(&ut), v);
    let a = (1.0 / (c_v.powf(el.kappa) * c_u)).powf(1.0 / (tk - 1.0));
    let b = c_v * a.powf(el.theta);
    if !(a.is_finite() && b.is_finite()) || a > 1e12 || b > 1e12 {
        return Err(Error::Divergent(format!("amplitudes a = {a:e}, b = {b:e}")));
    }
    Ok((u.scaled(a), v.scaled(b)))
}

/// Alternating Picard sweeps `v <- K(u^theta)`, `u <- K^T(v^kappa)` with
/// `||u||_{theta+1} = 1` after every sweep; the final pair is rescaled to the
/// amplitudes that solve the unnormalized system.
///
/// Within a sweep `v` solves its equation exactly, so the defect of the pair
/// after amplitude fixing reduces to `|u - w / c|_inf / |u|_inf` with
/// `w = K^T(v^kappa)` and `c = <w, u> / <u, u>`.
pub fn solve_el_pair_with(
    op: &KernelOperator,
    init_u: Field,
    init_v: Option<Field>,
    max_iter: usize,
    tol: f64,
) -> Result<ElSolution> {
    let el = el_exponents(&op.cfg)?;
    let mut u = init_u;
    if u.values.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument("u must be finite and nonnegative".into()));
    }
    normalize(&mut u, el.theta + 1.0)?;
    if let Some(v0) = init_v {
        // one half sweep from the supplied v, so that it influences the start
        if v0.values.iter().any(|&x| x > 0.0) {
            let vk: Vec<f64> = v0.values.iter().map(|x| x.max(0.0).powf(el.kappa)).collect();
            let mut w = op.apply_adjoint_values(&vk);
            if normalize(&mut w, el.theta + 1.0).is_ok() {
                u = w;
            }
        }
    }
    let mut history = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    let mut mixer = Anderson::new(DEFAULT_ANDERSON, u.grid.weights.clone());
    let mut best = f64::INFINITY;
    for k in 0..max_iter {
        let ut: Vec<f64> = u.values.iter().map(|x| x.powf(el.theta)).collect();
        let v = op.apply_values(&ut);
        let vk: Vec<f64> = v.values.iter().map(|x| x.max(0.0).powf(el.kappa)).collect();
        let mut w = op.apply_adjoint_values(&vk);
        if w.values.iter().any(|x| !x.is_finite() || x.abs() > 1e300) {
            return Err(Error::Divergent(format!("sweep {k} produced non-finite values")));
        }
        let c = compensated_sum(w.values.iter().zip(&u.values).map(|(a, b)| a * b))
            / compensated_sum(u.values.iter().map(|b| b * b));
        let scale = u.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let defect = u
            .values
            .iter()
            .zip(&w.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b / c).abs()))
            / scale;
        normalize(&mut w, el.theta + 1.0)?;
        sweeps = k + 1;
        history.push(defect);
        if defect < tol {
            u = w;
            converged = true;
            break;
        }
        if defect > 10.0 * best {
            mixer.reset();
        }
        best = best.min(defect);
        let mut next = w.clone();
        next.values = mixer.mix(&u.values, &w.values);
        next.values.iter_mut().for_each(|x| *x = x.max(0.0));
        u = match normalize(&mut next, el.theta + 1.0) {
            Ok(_) => next,
            Err(_) => {
                mixer.reset();
                w
            }
        };
    }
    let ut: Vec<f64> = u.values.iter().map(|x| x.powf(el.theta)).collect();
    let v = op.apply_values(&ut);
    let (u, v) = fix_amplitude(op, &u, &v)?;
    let residual = el_residual_with(op, &u, &v)?;
    Ok(ElSolution {
        u,
        v,
        residual,
        sweeps,
        converged,
        history,
    })
}

pub fn solve_el_pair(
    cfg: &ExponentConfig,
    grid: &Arc<HalfSpaceGrid>,
    init_u: &FuncSpec,
    init_v: Option<&FuncSpec>,
    max_iter: usize,
    tol: f64,
) -> Result<ElSolution> {
    let op = KernelOperator::new(*cfg, grid.clone())?;
    let u = sample(init_u, grid);
    let v = init_v.map(|s| sample(s, grid));
    solve_el_pair_with(&op, u, v, max_iter, tol)
}

/// The pair `(f^(p-1), K f)` rescaled to solve the system exactly when `f`
/// is a fixed point of the power map.
pub fn el_pair_from_f(op: &KernelOperator, f: &Field) -> Result<(Field, Field)> {
    let u = f.map(|x| x.max(0.0).powf(op.cfg.p - 1.0));
    let v = op.apply_values(&f.values);
    fix_amplitude(op, &u, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_grid, test_library};

    fn setup(nx: usize) -> (ExponentConfig, Arc<HalfSpaceGrid>) {
        let cfg = ExponentConfig::try_new(1, 1.0, 0.1, 0.1, 10.0 / 7.0, 10.0 / 7.0).unwrap();
        (cfg, Arc::new(build_grid(1, 4.0, 4.0, nx, nx, 2.0).unwrap()))
    }

    #[test]
    fn perturbation_is_seeded_and_bounded() {
        let (_, grid) = setup(16);
        let f = sample(&FuncSpec::gaussian(&[0.0, 1.0], 1.0), &grid);
        let a = perturbed(&f, 0.5, 9).unwrap();
        let b = perturbed(&f, 0.5, 9).unwrap();
        let c = perturbed(&f, 0.5, 10).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
        for (x, y) in a.values.iter().zip(&f.values) {
            assert!(*x >= 0.5 * y && *x <= 1.5 * y);
        }
        assert!(perturbed(&f, 1.0, 0).is_err());
        assert!(perturbed(&f, -0.1, 0).is_err());
    }

    #[test]
    fn power_iteration_dominates_library() {
        let (cfg, grid) = setup(24);
        let res = power_iterate(&cfg, &grid, &FuncSpec::gaussian(&[0.5, 1.0], 1.0), 500, 1e-8).unwrap();
        assert!(res.converged, "{:?}", res.warnings);
        assert!(res.warnings.is_empty());
        assert_eq!(res.trace.len(), res.iterations);
        let op = KernelOperator::new(cfg, grid.clone()).unwrap();
        for (name, spec) in test_library(1) {
            let r = op.rayleigh(&sample(&spec, &grid)).unwrap();
            assert!(r <= res.n_est * (1.0 + 1e-8), "{name}: {r} > {}", res.n_est);
        }
        assert!((weighted_norm(&res.f_star, 0.0, cfg.p).unwrap() - 1.0).abs() < 1e-12);
        assert!((weighted_norm(&res.g_star, 0.0, cfg.r).unwrap() - 1.0).abs() < 1e-12);
        assert!((op.rayleigh(&res.f_star).unwrap() - res.n_est).abs() < 1e-6 * res.n_est);
    }

    #[test]
    fn fixed_point_gives_euler_lagrange_pair() {
        let (cfg, grid) = setup(24);
        let res = power_iterate(&cfg, &grid, &FuncSpec::gaussian(&[0.0, 1.0], 1.0), 500, 1e-12).unwrap();
        let op = KernelOperator::new(cfg, grid.clone()).unwrap();
        let (u, v) = el_pair_from_f(&op, &res.f_star).unwrap();
        assert!(el_residual_with(&op, &u, &v).unwrap().max() < 1e-6);

        let sol = solve_el_pair_with(&op, res.f_star.clone(), None, 2000, 1e-10).unwrap();
        assert!(sol.converged);
        assert!(sol.residual.max() < 1e-8, "{:?}", sol.residual);
        // the solved u is a multiple of f^(p-1)
        let ratio: Vec<f64> = sol
            .u
            .values
            .iter()
            .zip(&u.values)
            .filter(|(_, b)| **b > 1e-6 * u.max())
            .map(|(a, b)| a / b)
            .collect();
        let lo = ratio.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratio.iter().copied().fold(0.0, f64::max);
        assert!(hi / lo - 1.0 < 1e-5, "{lo} {hi}");
    }

    #[test]
    fn p_equal_q_is_flagged() {
        // p = r = 2 forces q = 2
        let cfg = ExponentConfig::try_new(1, 1.2, 0.4, 0.4, 2.0, 2.0).unwrap();
        let grid = Arc::new(build_grid(1, 4.0, 4.0, 16, 16, 2.0).unwrap());
        let res = power_iterate(&cfg, &grid, &FuncSpec::gaussian(&[0.0, 1.0], 1.0), 20, 1e-8).unwrap();
        assert!(res.warnings.iter().any(|w| w.contains("p = q")));
    }

    #[test]
    fn rejects_bad_initial_fields() {
        let (cfg, grid) = setup(16);
        let op = KernelOperator::new(cfg, grid.clone()).unwrap();
        let zero = Field::zeros(grid.clone());
        assert_eq!(power_iterate_with(&op, zero, ExtremalOptions::default()).unwrap_err(), Error::ZeroField);
        let neg = sample(&FuncSpec::gaussian(&[0.0, 1.0], 1.0), &grid).scaled(-1.0);
        assert!(matches!(
            power_iterate_with(&op, neg, ExtremalOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
