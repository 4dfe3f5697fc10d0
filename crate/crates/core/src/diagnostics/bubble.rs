use serde::{Deserialize, Serialize};

use crate::discretization::Field;
use crate::error::{Error, Result};

/// Boundary-row samples of a field: points `y` in `R^n` and values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub n: u32,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    /// Node spacing, used for the multistart offsets.
    pub spacing: f64,
}

/// The first (lowest) t-row of `f`.
pub fn boundary_trace(f: &Field) -> BoundaryTrace {
    let g = &f.grid;
    let mut points = Vec::with_capacity(g.columns());
    let mut values = Vec::with_capacity(g.columns());
    for col in 0..g.columns() {
        let [ix, iy] = g.column_indices(col);
        points.push([g.x_nodes[ix], if g.n == 1 { 0.0 } else { g.x_nodes[iy] }]);
        values.push(f.values[col * g.nt]);
    }
    BoundaryTrace {
        n: g.n,
        points,
        values,
        spacing: g.dx(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleFit {
    pub c: f64,
    pub d: f64,
    pub center: [f64; 2],
    pub exponent: f64,
    /// `||fit - trace||_2 / ||trace||_2`; `+inf` when no start converged.
    pub residual: f64,
    pub converged: bool,
}

impl BubbleFit {
    pub fn value(&self, y: [f64; 2]) -> f64 {
        let r2 = (y[0] - self.center[0]).powi(2) + (y[1] - self.center[1]).powi(2);
        self.c * (r2 + self.d * self.d).powf(-self.exponent)
    }
}

/// Parameters `[ln c, d, y0, y0']`; the last is unused for `n = 1`.
struct Model<'a> {
    trace: &'a BoundaryTrace,
    e: f64,
    /// Indices of the positive samples.
    keep: Vec<usize>,
    logs: Vec<f64>,
}

impl Model<'_> {
    fn np(&self) -> usize {
        2 + self.trace.n as usize
    }

    fn residuals(&self, th: &[f64; 4], r: &mut [f64], jac: Option<&mut [[f64; 4]]>) -> f64 {
        let np = self.np();
        let mut jac = jac;
        let mut cost = 0.0;
        for (k, &i) in self.keep.iter().enumerate() {
            let y = self.trace.points[i];
            let dy0 = y[0] - th[2];
            let dy1 = if np == 4 { y[1] - th[3] } else { 0.0 };
            let big_d = th[1] * th[1] + dy0 * dy0 + dy1 * dy1;
            let res = th[0] - self.e * big_d.ln() - self.logs[k];
            r[k] = res;
            cost += res * res;
            if let Some(j) = jac.as_deref_mut() {
                j[k] = [
                    1.0,
                    -self.e * 2.0 * th[1] / big_d,
                    self.e * 2.0 * dy0 / big_d,
                    self.e * 2.0 * dy1 / big_d,
                ];
            }
        }
        0.5 * cost
    }

    /// Levenberg-Marquardt from `th`; returns the final parameters and cost.
    fn solve(&self, mut th: [f64; 4]) -> Option<([f64; 4], f64)> {
        let m = self.keep.len();
        let np = self.np();
        let mut r = vec![0.0; m];
        let mut jac = vec![[0.0; 4]; m];
        let mut cost = self.residuals(&th, &mut r, Some(&mut jac));
        let mut mu = 1e-3;
        let mut trial = vec![0.0; m];
        for _ in 0..500 {
            let mut jtj = [[0.0; 4]; 4];
            let mut jtr = [0.0; 4];
            for (row, res) in jac.iter().zip(&r) {
                for a in 0..np {
                    jtr[a] += row[a] * res;
                    for b in 0..np {
                        jtj[a][b] += row[a] * row[b];
                    }
                }
            }
            let grad = jtr[..np].iter().map(|v| v.abs()).fold(0.0, f64::max);
            if grad < 1e-15 * (1.0 + cost) {
                break;
            }
            let mut improved = false;
            for _ in 0..40 {
                let mut a = [[0.0; 4]; 4];
                for i in 0..np {
                    a[i][..np].copy_from_slice(&jtj[i][..np]);
                    a[i][i] += mu * jtj[i][i].max(1e-12);
                }
                let Some(step) = solve_small(a, jtr, np) else {
                    mu *= 10.0;
                    continue;
                };
                let mut cand = th;
                for i in 0..np {
                    cand[i] -= step[i];
                }
                let c = self.residuals(&cand, &mut trial, None);
                if c.is_finite() && c <= cost {
                    let small = (0..np).all(|i| step[i].abs() <= 1e-13 * (1.0 + th[i].abs()));
                    th = cand;
                    let prev = cost;
                    cost = self.residuals(&th, &mut r, Some(&mut jac));
                    mu = (mu / 3.0).max(1e-15);
                    improved = !small && prev - cost > 1e-17 * prev.max(1e-300);
                    break;
                }
                mu *= 4.0;
            }
            if !improved {
                break;
            }
        }
        th.iter().all(|v| v.is_finite()).then_some((th, cost))
    }
}

fn solve_small(mut a: [[f64; 4]; 4], mut b: [f64; 4], n: usize) -> Option<[f64; 4]> {
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Least-squares fit of `c (|y - y0|^2 + d^2)^(-e)` to the positive samples
/// of `trace`, in log space, from starts `d in {0.5, 1, 2}` and `y0` at the
/// sample maximum and one node to either side (along each axis).
pub fn fit_boundary_bubble(trace: &BoundaryTrace, exponent: f64) -> Result<BubbleFit> {
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(Error::InvalidArgument(format!("bubble exponent {exponent} must be positive")));
    }
    if trace.points.len() != trace.values.len() {
        return Err(Error::InvalidArgument("trace points and values differ in length".into()));
    }
    let keep: Vec<usize> = (0..trace.values.len())
        .filter(|&i| trace.values[i] > 0.0 && trace.values[i].is_finite())
        .collect();
    let model = Model {
        trace,
        e: exponent,
        logs: keep.iter().map(|&i| trace.values[i].ln()).collect(),
        keep,
    };
    let failed = BubbleFit {
        c: f64::NAN,
        d: f64::NAN,
        center: [f64::NAN; 2],
        exponent,
        residual: f64::INFINITY,
        converged: false,
    };
    if model.keep.len() < model.np() {
        if model.keep.is_empty() {
            return Err(Error::ZeroField);
        }
        return Ok(failed);
    }
    let imax = model
        .keep
        .iter()
        .copied()
        .max_by(|&a, &b| trace.values[a].total_cmp(&trace.values[b]))
        .expect("nonempty");
    let peak = trace.points[imax];
    let h = trace.spacing;
    let mut shifts = vec![[0.0, 0.0], [-h, 0.0], [h, 0.0]];
    if trace.n == 2 {
        shifts.extend([[0.0, -h], [0.0, h]]);
    }
    let mut best: Option<([f64; 4], f64)> = None;
    for d0 in [0.5, 1.0, 2.0] {
        for s in &shifts {
            let y0 = [peak[0] + s[0], peak[1] + s[1]];
            // optimal ln c for the remaining parameters
            let mut th = [0.0, d0, y0[0], y0[1]];
            let mut r = vec![0.0; model.keep.len()];
            model.residuals(&th, &mut r, None);
            th[0] = -r.iter().sum::<f64>() / r.len() as f64;
            if let Some((t, c)) = model.solve(th) {
                if best.as_ref().is_none_or(|b| c < b.1) {
                    best = Some((t, c));
                }
            }
        }
    }
    let Some((th, _)) = best else {
        return Ok(failed);
    };
    let fit = BubbleFit {
        c: th[0].exp(),
        d: th[1].abs(),
        center: [th[2], if trace.n == 2 { th[3] } else { 0.0 }],
        exponent,
        residual: 0.0,
        converged: true,
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for (y, v) in trace.points.iter().zip(&trace.values) {
        let m = fit.value(*y);
        num += (m - v) * (m - v);
        den += v * v;
    }
    let residual = (num / den).sqrt();
    if !residual.is_finite() || !fit.c.is_finite() || fit.d == 0.0 {
        return Ok(failed);
    }
    Ok(BubbleFit { residual, ..fit })
}
