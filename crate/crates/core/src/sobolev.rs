//! Gradient representation formula on the half space and the first-order
//! weighted Sobolev inequality it yields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_forms::{bounds_report, representation_constant};
use crate::discretization::{FuncSpec, GridSpec};
use crate::error::{Error, Result};
use crate::exponents::{sobolev_exponent, ExponentConfig, SobolevExponent};
use crate::operators::cell::face_integral;
use crate::quad::{adaptive_gk, compensated_sum, GaussLegendre};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub point: Vec<f64>,
    pub exact: f64,
    /// `int <grad u(y), x - y> |x - y|^-d dy` over the half space.
    pub volume_term: f64,
    /// `int u(y', 0) t |x - y'|^-d dy'` over the boundary, or its limit
    /// `C(d) u(x)` when `x` lies on it.
    pub boundary_term: f64,
    /// `(volume + boundary) / (2 C(d))`, exact at every point of the closed
    /// half space.
    pub represented: f64,
    /// `volume / C(d)`, exact on the boundary `t = 0`.
    pub boundary_form: f64,
    /// `|represented - exact| / max u`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationReport {
    pub c_d: f64,
    pub peak: f64,
    pub probes: Vec<ProbeRecord>,
    pub max_error: f64,
}

/// `int_a^b ln sqrt(h^2 + s^2) ds`.
fn log_line(h: f64, a: f64, b: f64) -> f64 {
    let h = h.abs();
    let prim = |s: f64| {
        let r2 = h * h + s * s;
        let log_term = if r2 == 0.0 { 0.0 } else { 0.5 * s * r2.ln() };
        let atan_term = if h == 0.0 { 0.0 } else { h * (s / h).atan() };
        log_term - s + atan_term
    };
    prim(b) - prim(a)
}

/// `int_cell (x - y) |x - y|^-d dy` for an axis-aligned cell, written as a
/// boundary integral of `-ln|x - y|` (d = 2) or `|x - y|^-1` (d = 3).
fn cell_vector_weight(lo: &[f64], hi: &[f64], x: &[f64], out: &mut [f64; 3]) {
    let d = x.len();
    if d == 2 {
        out[0] = log_line(lo[0] - x[0], lo[1] - x[1], hi[1] - x[1]) - log_line(hi[0] - x[0], lo[1] - x[1], hi[1] - x[1]);
        out[1] = log_line(lo[1] - x[1], lo[0] - x[0], hi[0] - x[0]) - log_line(hi[1] - x[1], lo[0] - x[0], hi[0] - x[0]);
        out[2] = 0.0;
        return;
    }
    let scale = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    for axis in 0..3 {
        let (b, c) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let face = |plane: f64| {
            let h = (plane - x[axis]).abs().max(1e-14 * scale);
            face_integral(h, lo[b] - x[b], hi[b] - x[b], lo[c] - x[c], hi[c] - x[c], 1.0)
        };
        out[axis] = face(hi[axis]) - face(lo[axis]);
    }
}

fn inside_box(grid: &GridSpec, x: &[f64]) -> bool {
    let n = grid.n as usize;
    x.len() == n + 1
        && x[..n].iter().all(|v| v.abs() <= grid.x_extent)
        && x[n] >= 0.0
        && x[n] <= grid.t_max
}

/// Half-space representation of `u` at `probes` from its analytic gradient.
///
/// The volume integral is a sum over the cells of `grid` of the cell-centre
/// gradient against the exact cell integral of the vector kernel, so the
/// kernel singularity at the probe is integrated in closed form.
pub fn representation_check(u_spec: &FuncSpec, probes: &[Vec<f64>], grid: &GridSpec) -> Result<RepresentationReport> {
    let dim = grid.n as usize + 1;
    u_spec.validate(dim)?;
    let (centre, radius) = u_spec
        .support_ball()
        .ok_or_else(|| Error::InvalidArgument("representation check needs a compactly supported function".into()))?;
    let n = grid.n as usize;
    if centre[..n].iter().any(|c| c.abs() + radius > grid.x_extent) || centre[n] + radius > grid.t_max {
        return Err(Error::InvalidArgument("support of u leaves the grid box".into()));
    }
    for p in probes {
        if !inside_box(grid, p) {
            return Err(Error::InvalidArgument(format!("probe {p:?} outside the grid box")));
        }
    }
    let g = grid.build()?;
    let dx = g.dx();
    let x_edges: Vec<f64> = (0..=g.nx).map(|i| -g.x_extent + i as f64 * dx).collect();

    // cells meeting the support, with their gradient at the centre
    let mut cells: Vec<([f64; 3], [f64; 3], [f64; 3])> = Vec::new();
    let mut grad = vec![0.0; dim];
    let mut peak: f64 = 0.0;
    for idx in 0..g.len() {
        let pt = g.point(idx);
        peak = peak.max(u_spec.value(&pt).abs());
        u_spec.gradient(&pt, &mut grad);
        if grad.iter().all(|v| *v == 0.0) {
            continue;
        }
        let [ix, iy] = g.column_indices(g.column(idx));
        let jt = g.row(idx);
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        lo[0] = x_edges[ix];
        hi[0] = x_edges[ix + 1];
        if n == 2 {
            lo[1] = x_edges[iy];
            hi[1] = x_edges[iy + 1];
        }
        lo[n] = g.t_edges[jt];
        hi[n] = g.t_edges[jt + 1];
        let mut gv = [0.0; 3];
        gv[..dim].copy_from_slice(&grad);
        cells.push((lo, hi, gv));
    }
    for p in probes {
        peak = peak.max(u_spec.value(p).abs());
    }

    let c_d = representation_constant(dim as u32);
    let records: Vec<ProbeRecord> = probes
        .par_iter()
        .map(|x| {
            let mut w = [0.0; 3];
            let volume_term = compensated_sum(cells.iter().map(|(lo, hi, gv)| {
                cell_vector_weight(&lo[..dim], &hi[..dim], x, &mut w);
                (0..dim).map(|k| gv[k] * w[k]).sum::<f64>()
            }));
            // on the boundary the Poisson term tends to C(d) u(x)
            let boundary_term = if x[n] == 0.0 {
                c_d * u_spec.value(x)
            } else {
                boundary_poisson(u_spec, &centre, radius, x)
            };
            let exact = u_spec.value(x);
            let represented = (volume_term + boundary_term) / (2.0 * c_d);
            ProbeRecord {
                point: x.clone(),
                exact,
                volume_term,
                boundary_term,
                represented,
                boundary_form: volume_term / c_d,
                error: if peak > 0.0 { (represented - exact).abs() / peak } else { 0.0 },
            }
        })
        .collect();
    let max_error = records.iter().map(|r| r.error).fold(0.0, f64::max);
    Ok(RepresentationReport {
        c_d,
        peak,
        probes: records,
        max_error,
    })
}

/// `int u(y', 0) t |x - (y', 0)|^-d dy'` over the part of the boundary
/// inside the support ball.
fn boundary_poisson(u: &FuncSpec, centre: &[f64], radius: f64, x: &[f64]) -> f64 {
    let dim = x.len();
    let n = dim - 1;
    let t = x[n];
    let reach2 = radius * radius - centre[n] * centre[n];
    if reach2 <= 0.0 {
        return 0.0;
    }
    let reach = reach2.sqrt();
    let kernel = |y: &[f64]| {
        let r2: f64 = (0..n).map(|k| (x[k] - y[k]).powi(2)).sum::<f64>() + t * t;
        t * r2.powf(-0.5 * dim as f64)
    };
    if n == 1 {
        adaptive_gk(
            |s| {
                let y = [s, 0.0];
                u.value(&y) * kernel(&y)
            },
            centre[0] - reach,
            centre[0] + reach,
            1e-14,
            1e-12,
        )
    } else {
        adaptive_gk(
            |s| {
                adaptive_gk(
                    |r| {
                        let y = [s, r, 0.0];
                        u.value(&y) * kernel(&y)
                    },
                    centre[1] - reach,
                    centre[1] + reach,
                    1e-14,
                    1e-11,
                )
            },
            centre[0] - reach,
            centre[0] + reach,
            1e-13,
            1e-10,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub n: u32,
    pub p: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub p_star: f64,
    /// `(int t^beta1 |u|^p*)^(p / p*)`
    pub lhs: f64,
    /// `int t^alpha1 |grad u|^p`
    pub rhs: f64,
    pub ratio: f64,
    pub certified_bound: f64,
    /// `certified_bound / ratio` (infinite for `u = 0`).
    pub slack: f64,
    pub within_bound: bool,
}

/// Panel counts for the tensor Gauss-Legendre quadrature over the support
/// box of `u`; `t`-panels are graded towards the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WsOptions {
    pub panels: usize,
    pub order: usize,
    pub grading: f64,
}

impl Default for WsOptions {
    fn default() -> Self {
        Self {
            panels: 48,
            order: 6,
            grading: 2.0,
        }
    }
}

fn window_error(w: &SobolevExponent) -> Error {
    let mut why = Vec::new();
    if !w.p_below_p_star {
        why.push(format!("p = {} is not below p* = {}", w.p, w.p_star));
    }
    if !w.alpha_window {
        why.push(format!(
            "alpha1 = {} outside ({}, {})",
            w.alpha, w.alpha_lower, w.alpha_upper
        ));
    }
    if !w.beta_window {
        why.push(format!("beta1 = {} outside (-1, {}]", w.beta, w.beta_upper));
    }
    Error::Inadmissible(why)
}

/// The weighted inequality of order one follows from the Stein-Weiss
/// inequality with `lambda = n`, `alpha = alpha1 / p`, `beta = -beta1 / p*`
/// and the pointwise bound `|u| <= C(d)^-1 int |grad u| |x - y|^-n`, so
/// `S <= (N / C(d))^p` for any upper bound `N` of the sharp constant.
/// Smooth bumps with compact support in the closed upper half space, used as
/// default test functions for the weighted Sobolev ratio.
pub fn test_functions(n: u32) -> Vec<FuncSpec> {
    let at = |x: f64, t: f64| {
        let mut c = vec![x];
        c.extend(std::iter::repeat_n(0.0, n as usize - 1));
        c.push(t);
        c
    };
    vec![
        FuncSpec::cutoff(&at(0.0, 0.5), 1.0, 1.0),
        FuncSpec::cutoff(&at(0.0, 1.5), 1.2, 1.0),
        FuncSpec::cutoff(&at(0.4, 0.2), 0.8, 0.5),
        FuncSpec::cutoff(&at(0.0, 0.0), 1.0, 2.0),
        FuncSpec::Product {
            factors: vec![
                FuncSpec::gaussian(&at(0.2, 0.6), 0.5),
                FuncSpec::cutoff(&at(0.0, 0.8), 1.5, 1.0),
            ],
        },
    ]
}

pub fn certified_bound(n: u32, p: f64, alpha1: f64, beta1: f64) -> Result<f64> {
    let w = sobolev_exponent(n, p, alpha1, beta1, 1)?;
    if !w.in_window() {
        return Err(window_error(&w));
    }
    let q = w.p_star;
    let cfg = ExponentConfig::try_new(n, n as f64, alpha1 / p, -beta1 / q, p, q / (q - 1.0))?;
    let upper = bounds_report(&cfg)?.upper;
    Ok((upper / representation_constant(n + 1)).powf(p))
}

/// Both sides of the weighted Sobolev inequality for a compactly supported
/// `u`, with the analytic gradient.
pub fn ws_ratio(u_spec: &FuncSpec, n: u32, p: f64, alpha1: f64, beta1: f64, opts: &WsOptions) -> Result<SobolevReport> {
    let bound = certified_bound(n, p, alpha1, beta1)?;
    let p_star = sobolev_exponent(n, p, alpha1, beta1, 1)?.p_star;
    let dim = n as usize + 1;
    u_spec.validate(dim)?;
    let (centre, radius) = u_spec
        .support_ball()
        .ok_or_else(|| Error::InvalidArgument("ws_ratio needs a compactly supported function".into()))?;
    if opts.panels == 0 || opts.order == 0 || opts.grading < 1.0 {
        return Err(Error::InvalidArgument("bad quadrature options".into()));
    }
    let t_hi = centre[n as usize] + radius;
    if t_hi <= 0.0 {
        return Err(Error::InvalidArgument("support of u lies below the half space".into()));
    }
    let t_lo = (centre[n as usize] - radius).max(0.0);
    let gl = GaussLegendre::new(opts.order);
    let m = opts.panels;
    // x-panels uniform over the support; t-panels graded from the lower end
    let x_nodes: Vec<Vec<(f64, f64)>> = (0..n as usize)
        .map(|k| {
            let a = centre[k] - radius;
            let h = 2.0 * radius / m as f64;
            (0..m)
                .flat_map(|i| panel_nodes(&gl, a + i as f64 * h, a + (i + 1) as f64 * h))
                .collect()
        })
        .collect();
    let t_edges: Vec<f64> = (0..=m)
        .map(|j| t_lo + (t_hi - t_lo) * (j as f64 / m as f64).powf(opts.grading))
        .collect();
    let t_nodes: Vec<(f64, f64)> = t_edges.windows(2).flat_map(|w| panel_nodes(&gl, w[0], w[1])).collect();

    let line = |xs: &[f64]| -> (f64, f64) {
        let mut pt = vec![0.0; dim];
        pt[..xs.len()].copy_from_slice(xs);
        let mut grad = vec![0.0; dim];
        let mut lhs = Vec::with_capacity(t_nodes.len());
        let mut rhs = Vec::with_capacity(t_nodes.len());
        for &(t, wt) in &t_nodes {
            pt[dim - 1] = t;
            let v = u_spec.value(&pt);
            if v == 0.0 {
                continue;
            }
            u_spec.gradient(&pt, &mut grad);
            let g2: f64 = grad.iter().map(|g| g * g).sum();
            lhs.push(wt * t.powf(beta1) * v.abs().powf(p_star));
            rhs.push(wt * t.powf(alpha1) * g2.powf(0.5 * p));
        }
        (compensated_sum(lhs), compensated_sum(rhs))
    };
    let columns: Vec<(f64, f64)> = if n == 1 {
        x_nodes[0]
            .par_iter()
            .map(|&(x, wx)| {
                let (a, b) = line(&[x]);
                (wx * a, wx * b)
            })
            .collect()
    } else {
        x_nodes[0]
            .par_iter()
            .map(|&(x, wx)| {
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for &(y, wy) in &x_nodes[1] {
                    let (la, lb) = line(&[x, y]);
                    a.push(wy * la);
                    b.push(wy * lb);
                }
                (wx * compensated_sum(a), wx * compensated_sum(b))
            })
            .collect()
    };
    let lhs = compensated_sum(columns.iter().map(|c| c.0)).powf(p / p_star);
    let rhs = compensated_sum(columns.iter().map(|c| c.1));
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(SobolevReport {
        n,
        p,
        alpha1,
        beta1,
        p_star,
        lhs,
        rhs,
        ratio,
        certified_bound: bound,
        slack: if ratio > 0.0 { bound / ratio } else { f64::INFINITY },
        within_bound: ratio <= bound,
    })
}

fn panel_nodes(gl: &GaussLegendre, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gl.nodes.iter().zip(&gl.weights).map(|(x, w)| (mid + half * x, half * w)).collect()
}
