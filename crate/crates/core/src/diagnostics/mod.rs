//! Numerical checks of the structural statements about extremals and of the
//! change-of-variables identities: symmetry, monotonicity, boundary bubble
//! profiles, Kelvin and hyperbolic equivalence, dilation invariance.

mod bubble;
mod hyperbolic;
mod kelvin;
mod report;
mod scaling;

pub use bubble::{boundary_trace, fit_boundary_bubble, BoundaryTrace, BubbleFit};
pub use hyperbolic::{forced_weights, hyperbolic_check, HyperbolicReport};
pub use kelvin::{kelvin_check, BallGridSpec, KelvinReport};
pub use report::{CheckRecord, CheckStatus};
pub use scaling::{scaling_check, ScalingReport};

use serde::{Deserialize, Serialize};

use crate::discretization::Field;
use crate::error::{Error, Result};
use crate::quad::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// Estimated axis position in `x` (and `y` for `n = 2`).
    pub center: [f64; 2],
    pub residual: f64,
}

/// `|f|^p`-weighted centroid of the x-coordinates.
pub fn centroid(f: &Field, p: f64) -> Result<[f64; 2]> {
    let g = &f.grid;
    let mass: Vec<f64> = f
        .values
        .iter()
        .zip(&g.weights)
        .map(|(v, w)| v.abs().powf(p) * w)
        .collect();
    let total = compensated_sum(mass.iter().copied());
    if !(total > 0.0) {
        return Err(Error::ZeroField);
    }
    let mut c = [0.0; 2];
    for (axis, slot) in c.iter_mut().enumerate().take(g.n as usize) {
        *slot = compensated_sum(
            mass.iter()
                .enumerate()
                .map(|(i, m)| m * g.point3(i)[axis]),
        ) / total;
    }
    Ok(c)
}

/// Points in the Lagrange stencil used to evaluate mirror images.
const STENCIL: usize = 8;

/// Lagrange interpolation on the uniform x-nodes with a stencil of
/// [`STENCIL`] points (shifted inwards near the ends); `None` outside the
/// node range.
fn interp_uniform(nodes: &[f64], values: impl Fn(usize) -> f64, x: f64) -> Option<f64> {
    let n = nodes.len();
    let h = nodes[1] - nodes[0];
    let s = (x - nodes[0]) / h;
    if s < -1e-12 || s > (n - 1) as f64 + 1e-12 {
        return None;
    }
    let m = STENCIL.min(n);
    let k = (s.floor() as isize).clamp(0, n as isize - 2) as usize;
    let lo = (k + 1).saturating_sub(m / 2).min(n - m);
    let mut acc = 0.0;
    for a in lo..lo + m {
        let mut w = 1.0;
        for b in lo..lo + m {
            if a != b {
                w *= (s - b as f64) / (a as f64 - b as f64);
            }
        }
        acc += w * values(a);
    }
    Some(acc)
}

/// `||f - f(2c - x)|| / ||f||` for one x-axis, over nodes whose mirror image
/// stays inside the box.
fn reflection_defect(f: &Field, axis: usize, c: f64) -> f64 {
    let g = &f.grid;
    let mut num = Vec::with_capacity(f.len());
    let mut den = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        let [ix, iy] = g.column_indices(g.column(i));
        let jt = g.row(i);
        let own = if axis == 0 { ix } else { iy };
        let mirror = 2.0 * c - g.x_nodes[own];
        let val = |k: usize| {
            let idx = if axis == 0 { g.index(k, iy, jt) } else { g.index(ix, k, jt) };
            f.values[idx]
        };
        if let Some(r) = interp_uniform(&g.x_nodes, val, mirror) {
            let d = f.values[i] - r;
            num.push(d * d * g.weights[i]);
            den.push(f.values[i] * f.values[i] * g.weights[i]);
        }
    }
    let den = compensated_sum(den);
    if den > 0.0 {
        (compensated_sum(num) / den).sqrt()
    } else {
        0.0
    }
}

/// Golden-section search for the axis position minimizing the defect,
/// within two cells of `start`.
fn best_axis(f: &Field, axis: usize, start: f64) -> (f64, f64) {
    let h = f.grid.dx();
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (start - 2.0 * h, start + 2.0 * h);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = reflection_defect(f, axis, x1);
    let mut f2 = reflection_defect(f, axis, x2);
    while b - a > 1e-9 * h {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = reflection_defect(f, axis, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = reflection_defect(f, axis, x2);
        }
    }
    let at_start = reflection_defect(f, axis, start);
    let (c, d) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if at_start <= d {
        (start, at_start)
    } else {
        (c, d)
    }
}

/// Reflection defect `||f(x,t) - f(2c-x,t)|| / ||f||` in the cell-measure
/// `L^2` norm, restricted to nodes whose mirror image stays inside the box.
/// The axis `c` minimizes the defect near the `|f|^p` centroid (`p` from the
/// caller, `2` if unsure); for `n = 2` each axis is reflected separately and
/// the larger defect is reported.
pub fn symmetry_residual(f: &Field, p: f64) -> Result<SymmetryReport> {
    if f.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("field"));
    }
    let mut center = centroid(f, p)?;
    let mut worst = 0.0f64;
    for (axis, c) in center.iter_mut().enumerate().take(f.grid.n as usize) {
        let (best, defect) = best_axis(f, axis, *c);
        *c = best;
        worst = worst.max(defect);
    }
    Ok(SymmetryReport {
        center,
        residual: worst,
    })
}

/// Largest increase of `f` when stepping one node away from `center` along
/// an x-axis line, relative to `max |f|`.
pub fn monotonicity_violation(f: &Field, center: [f64; 2]) -> Result<f64> {
    let g = &f.grid;
    let scale = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let nx = g.nx;
    let mut worst = 0.0f64;
    let lines = if g.n == 1 { 1 } else { nx };
    for axis in 0..g.n as usize {
        let c = center[axis];
        for other in 0..lines {
            for jt in 0..g.nt {
                let at = |k: usize| {
                    let idx = match (g.n, axis) {
                        (1, _) => g.index(k, 0, jt),
                        (_, 0) => g.index(k, other, jt),
                        _ => g.index(other, k, jt),
                    };
                    f.values[idx]
                };
                for k in 0..nx - 1 {
                    let (a, b) = (g.x_nodes[k], g.x_nodes[k + 1]);
                    let rise = if a >= c {
                        at(k + 1) - at(k)
                    } else if b <= c {
                        at(k) - at(k + 1)
                    } else {
                        continue;
                    };
                    worst = worst.max(rise);
                }
            }
        }
    }
    Ok(worst / scale)
}
