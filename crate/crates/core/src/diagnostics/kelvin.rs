//! Half-space functional versus its Kelvin image on the ball
//! `B = B_1(x1)`, `x1 = (0, .., -1)`, under the inversion about
//! `x0 = (0, .., -2)` with radius 2.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::discretization::{sample, FuncSpec, GridSpec};
use crate::error::{Error, Result};
use crate::exponents::{conformal_exponents, ExponentConfig};
use crate::operators::{weighted_norm, KernelOperator};
use crate::quad::compensated_sum;

/// Resolution of the ball quadrature. Radial and inner-ray integrals use
/// tanh-sinh nodes with step `6 / radial`; directions use `angular` points
/// on the circle (`n = 1`) or `angular / 2` polar Gauss points times
/// `angular` azimuths (`n = 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallGridSpec {
    pub radial: usize,
    pub angular: usize,
}

impl BallGridSpec {
    pub fn doubled(&self) -> Self {
        Self {
            radial: 2 * self.radial,
            angular: 2 * self.angular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KelvinReport {
    pub lhs_half: f64,
    pub lhs_ball: f64,
    pub functional_discrepancy: f64,
    pub norm_f_half: f64,
    pub norm_f_ball: f64,
    pub norm_discrepancy_f: f64,
    pub norm_g_half: f64,
    pub norm_g_ball: f64,
    pub norm_discrepancy_g: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Fixed tanh-sinh rule on `[0, 1]`: nodes, weights, and the distance of
/// each node to the right end (kept exact for singular weights there).
fn tanh_sinh_rule(steps: usize) -> Vec<(f64, f64, f64)> {
    let h = 6.0 / steps.max(4) as f64;
    let hpi = std::f64::consts::FRAC_PI_2;
    let mut out = Vec::new();
    let kmax = (3.2 / h).ceil() as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let u = hpi * t.sinh();
        let cu = u.cosh();
        let w = 0.5 * h * hpi * t.cosh() / (cu * cu);
        // x = (1 + tanh u) / 2, 1 - x = 1 / (1 + e^{2u})
        let right = 1.0 / (1.0 + (2.0 * u).exp());
        let left = 1.0 / (1.0 + (-2.0 * u).exp());
        if w < 1e-300 || right <= 0.0 || left <= 0.0 {
            continue;
        }
        out.push((left, w, right));
    }
    out
}

/// Unit directions with weights summing to the sphere area.
fn directions(n: u32, angular: usize) -> Vec<([f64; 3], f64)> {
    use std::f64::consts::PI;
    let m = angular.max(8);
    if n == 1 {
        (0..m)
            .map(|k| {
                let a = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                ([a.cos(), a.sin(), 0.0], 2.0 * PI / m as f64)
            })
            .collect()
    } else {
        let gl = crate::quad::GaussLegendre::new(m / 2);
        let mut out = Vec::new();
        for (z, wz) in gl.nodes.iter().zip(&gl.weights) {
            let s = (1.0 - z * z).sqrt();
            for k in 0..m {
                let a = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                out.push(([s * a.cos(), s * a.sin(), *z], wz * 2.0 * PI / m as f64));
            }
        }
        out
    }
}

struct Geometry {
    d: usize,
}

impl Geometry {
    fn x0(&self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.d - 1] = -2.0;
        v
    }

    fn x1(&self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.d - 1] = -1.0;
        v
    }

    /// Inversion image and `2 / |xi - x0|`.
    fn invert(&self, xi: &[f64; 3]) -> ([f64; 3], f64) {
        let x0 = self.x0();
        let mut diff = [0.0; 3];
        let mut r2 = 0.0;
        for k in 0..self.d {
            diff[k] = xi[k] - x0[k];
            r2 += diff[k] * diff[k];
        }
        let mut img = [0.0; 3];
        for k in 0..self.d {
            img[k] = x0[k] + 4.0 * diff[k] / r2;
        }
        (img, 2.0 / r2.sqrt())
    }
}

/// Both sides of the Kelvin identity at conformal exponents.
///
/// The half-space side uses the grid operator on `half`; the ball side is
/// `int_B w_a F(xi) P(xi)` with `P(xi) = int_B w_b G |xi - eta|^-lambda`,
/// integrated along rays from `xi` after the substitution
/// `rho = rho_max s^(1 / (n + 1 - lambda))`, which absorbs the kernel
/// singularity.
pub fn kelvin_check(
    f_spec: &FuncSpec,
    g_spec: &FuncSpec,
    cfg: &ExponentConfig,
    half: &GridSpec,
    ball: &BallGridSpec,
) -> Result<KelvinReport> {
    let conf = conformal_exponents(cfg.n, cfg.lambda, cfg.alpha, cfg.beta)?;
    if (cfg.p - conf.p_alpha).abs() > 1e-10 * conf.p_alpha || (cfg.r - conf.r_beta).abs() > 1e-10 * conf.r_beta {
        return Err(Error::InvalidArgument(format!(
            "Kelvin check needs conformal exponents p = {}, r = {}",
            conf.p_alpha, conf.r_beta
        )));
    }
    if cfg.alpha + cfg.beta < 0.0 {
        return Err(Error::InvalidArgument("Kelvin check needs alpha + beta >= 0".into()));
    }
    if half.n != cfg.n {
        return Err(Error::InvalidArgument("grid dimension differs from config".into()));
    }
    let dim = cfg.n as usize + 1;
    f_spec.validate(dim)?;
    g_spec.validate(dim)?;

    let grid = Arc::new(half.build()?);
    let op = KernelOperator::new(*cfg, grid.clone())?;
    let f = sample(f_spec, &grid);
    let g = sample(g_spec, &grid);
    let lhs_half = op.functional(&f, &g)?;
    let norm_f_half = weighted_norm(&f, 0.0, cfg.p)?;
    let norm_g_half = weighted_norm(&g, 0.0, cfg.r)?;

    let geo = Geometry { d: dim };
    let two_d = 2.0 * dim as f64;
    let mu1 = two_d - cfg.lambda - 2.0 * cfg.alpha;
    let mu2 = two_d - cfg.lambda - 2.0 * cfg.beta;
    let lambda = cfg.lambda;
    let x1 = geo.x1();
    let pull = |spec: &FuncSpec, mu: f64, xi: &[f64; 3]| -> f64 {
        let (img, s) = geo.invert(xi);
        s.powf(mu) * spec.value(&img[..dim])
    };
    // 1 - |xi - x1|^2 from the radius about x1, using the exact distance to
    // the sphere to avoid cancellation
    let depth = |r: f64, gap: f64| gap * (1.0 + r);

    let radial = tanh_sinh_rule(ball.radial);
    let dirs = directions(cfg.n, ball.angular);
    let inner_dirs = dirs.clone();
    let ray_rule = radial.clone();
    let de = dim as f64 - lambda;

    let targets: Vec<([f64; 3], f64, f64)> = radial
        .iter()
        .flat_map(|&(r, wr, gap)| {
            dirs.iter().map(move |(w, ww)| {
                let mut xi = x1;
                for k in 0..dim {
                    xi[k] += r * w[k];
                }
                (xi, wr * ww * r.powi(dim as i32 - 1), depth(r, gap))
            })
        })
        .collect();

    let parts: Vec<[f64; 3]> = targets
        .par_iter()
        .map(|&(xi, vol, inside)| {
            let fval = pull(f_spec, mu1, &xi);
            let gval = pull(g_spec, mu2, &xi);
            let nf = fval.abs().powf(cfg.p) * vol;
            let ng = gval.abs().powf(cfg.r) * vol;
            if fval == 0.0 {
                return [0.0, nf, ng];
            }
            let mut rel_xi = [0.0; 3];
            for k in 0..dim {
                rel_xi[k] = xi[k] - x1[k];
            }
            let mut pot = Vec::with_capacity(inner_dirs.len());
            for (om, wom) in &inner_dirs {
                let b: f64 = (0..dim).map(|k| rel_xi[k] * om[k]).sum();
                // roots of rho^2 + 2 b rho - inside = 0
                let root = (b * b + inside).sqrt();
                let rho_max = if b > 0.0 { inside / (b + root) } else { root - b };
                let mut ray = Vec::with_capacity(ray_rule.len());
                for &(s, ws, gap) in &ray_rule {
                    let rho = rho_max * s.powf(1.0 / de);
                    let mut eta = xi;
                    for k in 0..dim {
                        eta[k] += rho * om[k];
                    }
                    // 1 - |eta - x1|^2 = (rho_max - rho)(rho - rho_min), with
                    // rho_max - rho taken from the exact gap 1 - s
                    let to_end = -rho_max * ((-gap).ln_1p() / de).exp_m1();
                    let depth = to_end * (rho + b + root);
                    if !(depth > 0.0) {
                        continue;
                    }
                    let w_b = (2.0 / depth).powf(cfg.beta);
                    ray.push(ws * w_b * pull(g_spec, mu2, &eta));
                }
                pot.push(wom * rho_max.powf(de) / de * compensated_sum(ray));
            }
            let potential = compensated_sum(pot);
            [(2.0 / inside).powf(cfg.alpha) * fval * potential * vol, nf, ng]
        })
        .collect();
    let lhs_ball = compensated_sum(parts.iter().map(|v| v[0]));
    let norm_f_ball = compensated_sum(parts.iter().map(|v| v[1])).powf(1.0 / cfg.p);
    let norm_g_ball = compensated_sum(parts.iter().map(|v| v[2])).powf(1.0 / cfg.r);
    Ok(KelvinReport {
        lhs_half,
        lhs_ball,
        functional_discrepancy: rel(lhs_half, lhs_ball),
        norm_f_half,
        norm_f_ball,
        norm_discrepancy_f: rel(norm_f_half, norm_f_ball),
        norm_g_half,
        norm_g_ball,
        norm_discrepancy_g: rel(norm_g_half, norm_g_ball),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> ExponentConfig {
        ExponentConfig::try_new(1, 1.0, 0.1, 0.1, 10.0 / 7.0, 10.0 / 7.0).unwrap()
    }

    fn half(nx: usize) -> GridSpec {
        GridSpec {
            n: 1,
            x_extent: 4.0,
            t_max: 5.0,
            nx,
            nt: nx,
            grading: 2.0,
        }
    }

    #[test]
    fn inversion_is_an_involution_and_maps_ball_to_half_space() {
        let geo = Geometry { d: 2 };
        for xi in [[0.3, -0.8, 0.0], [-0.5, -1.2, 0.0], [0.0, -0.01, 0.0]] {
            let (img, s) = geo.invert(&xi);
            assert!(img[1] > 0.0);
            let (back, s2) = geo.invert(&img);
            assert!((back[0] - xi[0]).abs() < 1e-12 && (back[1] - xi[1]).abs() < 1e-12);
            assert!((s * s2 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_rules_integrate_exactly() {
        let rule = tanh_sinh_rule(24);
        let s: f64 = rule.iter().map(|(x, w, _)| w * x.powf(-0.5)).sum();
        assert!((s - 2.0).abs() < 1e-6);
        let area: f64 = directions(2, 16).iter().map(|d| d.1).sum();
        assert!((area - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn zero_pair_has_zero_discrepancy() {
        let zero = FuncSpec::gaussian(&[0.0, 1.0], 0.7).times(0.0);
        let rep = kelvin_check(&zero, &zero, &baseline(), &half(16), &BallGridSpec { radial: 8, angular: 16 }).unwrap();
        assert_eq!(rep.lhs_half, 0.0);
        assert_eq!(rep.lhs_ball, 0.0);
        assert_eq!(rep.functional_discrepancy, 0.0);
        assert_eq!(rep.norm_discrepancy_f, 0.0);
    }

    #[test]
    fn rejects_non_conformal_exponents() {
        let cfg = ExponentConfig::from_balance(1, 1.0, 0.1, 0.1, 1.5).unwrap();
        let f = FuncSpec::gaussian(&[0.0, 1.0], 0.7);
        let err = kelvin_check(&f, &f, &cfg, &half(16), &BallGridSpec { radial: 8, angular: 16 });
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn gaussian_norms_survive_the_inversion() {
        let f = FuncSpec::gaussian(&[0.0, 1.0], 0.7);
        let g = FuncSpec::gaussian(&[0.3, 1.2], 0.8);
        let rep = kelvin_check(&f, &g, &baseline(), &half(32), &BallGridSpec { radial: 16, angular: 32 }).unwrap();
        assert!(rep.norm_discrepancy_f < 1e-2, "{rep:?}");
        assert!(rep.norm_discrepancy_g < 1e-2, "{rep:?}");
        assert!(rep.functional_discrepancy < 2e-2, "{rep:?}");
    }
}
