//! Independent oracles for the four Hardy region integrals: nested
//! Cartesian quadrature (slices in `t`) and Monte Carlo.

use serde::{Deserialize, Serialize};

use crate::discretization::mc::{mc_integral, McEstimate, Region};
use crate::error::{Error, Result};
use crate::exponents::ExponentConfig;
use crate::quad::tanh_sinh;

const LEVELS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyIntegral {
    C1,
    C2,
    C3,
    C4,
}

impl HardyIntegral {
    pub const ALL: [HardyIntegral; 4] = [HardyIntegral::C1, HardyIntegral::C2, HardyIntegral::C3, HardyIntegral::C4];
}

/// `(sigma, mu, tail)` for the integrand `t^-sigma |Y|^-mu` over the half
/// ball (`tail = false`) or its complement.
pub fn hardy_integrand(cfg: &ExponentConfig, which: HardyIntegral) -> (f64, f64, bool) {
    let pc = cfg.p_conj();
    match which {
        HardyIntegral::C1 => (cfg.beta * cfg.q, cfg.lambda * cfg.q, true),
        HardyIntegral::C2 => (cfg.alpha * pc, 0.0, false),
        HardyIntegral::C3 => (cfg.alpha * pc, cfg.lambda * pc, true),
        HardyIntegral::C4 => (cfg.beta * cfg.q, 0.0, false),
    }
}

/// `int_0^inf g` through `x = a + c s / (1 - s)`.
fn half_line(mut g: impl FnMut(f64) -> f64, a: f64, c: f64) -> f64 {
    tanh_sinh(
        |s, _, dr| {
            let x = a + c * s / dr;
            g(x) * c / (dr * dr)
        },
        0.0,
        1.0,
        LEVELS,
    )
}

/// `int_{|x| > rho0} (|x|^2 + t^2)^(-mu/2) dx` over `R^n`.
fn outer_slice(n: u32, rho0: f64, t: f64, mu: f64) -> f64 {
    let scale = t.max(rho0).max(1e-300);
    match n {
        1 => 2.0 * half_line(|x| (x * x + t * t).powf(-0.5 * mu), rho0, scale),
        _ => 2.0 * std::f64::consts::PI * half_line(|r| r * (r * r + t * t).powf(-0.5 * mu), rho0, scale),
    }
}

/// Measure of `{|x| < rho}` in `R^n`.
fn inner_slice(n: u32, rho: f64) -> f64 {
    match n {
        1 => 2.0 * rho,
        _ => std::f64::consts::PI * rho * rho,
    }
}

/// Nested quadrature of one Hardy integral at radius `radius`; `n = 1, 2`.
pub fn hardy_quadrature(cfg: &ExponentConfig, which: HardyIntegral, radius: f64) -> Result<f64> {
    if !(cfg.n == 1 || cfg.n == 2) {
        return Err(Error::Unsupported(format!("quadrature oracle for n = {}", cfg.n)));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let (sigma, mu, tail) = hardy_integrand(cfg, which);
    let n = cfg.n;
    let r2 = radius * radius;
    // the chord (R^2 - t^2) is computed from the distance to t = R
    let chord = |t: f64, to_end: f64| (to_end * (t + radius)).max(0.0).sqrt();
    if !tail {
        return Ok(tanh_sinh(
            |t, dl, dr| dl.powf(-sigma) * inner_slice(n, chord(t, dr)),
            0.0,
            radius,
            LEVELS,
        ));
    }
    let near = tanh_sinh(
        |t, dl, dr| dl.powf(-sigma) * outer_slice(n, chord(t, dr), t, mu),
        0.0,
        radius,
        LEVELS,
    );
    let far = half_line(|t| if t * t >= r2 { t.powf(-sigma) * outer_slice(n, 0.0, t, mu) } else { 0.0 }, radius, radius);
    Ok(near + far)
}

/// Monte Carlo estimate of one Hardy integral; tails are sampled with a
/// radial density matching the integrand decay, so the variance is finite
/// whenever `2 sigma < 1`.
pub fn hardy_monte_carlo(
    cfg: &ExponentConfig,
    which: HardyIntegral,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let (sigma, mu, tail) = hardy_integrand(cfg, which);
    let dim = cfg.n as usize + 1;
    let f = move |y: &[f64]| {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        y[dim - 1].powf(-sigma) * r2.powf(-0.5 * mu)
    };
    let region = if tail {
        Region::ComplementBallPlus {
            radius,
            decay: sigma + mu - dim as f64,
        }
    } else {
        Region::BallPlus {
            radius,
            center: vec![0.0; dim],
        }
    };
    mc_integral(f, dim, &region, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::hardy_constants;

    #[test]
    fn half_disk_and_half_ball_volumes() {
        let cfg = ExponentConfig::try_new(1, 1.0, 0.0, 0.0, 4.0 / 3.0, 4.0 / 3.0).unwrap();
        let v = hardy_quadrature(&cfg, HardyIntegral::C2, 2.0).unwrap();
        assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-10, "{v}");
        let cfg = ExponentConfig::from_balance(2, 1.5, 0.0, 0.0, 1.5).unwrap();
        let v = hardy_quadrature(&cfg, HardyIntegral::C4, 1.0).unwrap();
        assert!((v - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let cfg = ExponentConfig::try_new(1, 1.0, 0.1, 0.1, 10.0 / 7.0, 10.0 / 7.0).unwrap();
        let h = hardy_constants(&cfg).unwrap();
        for (which, law) in HardyIntegral::ALL.iter().zip([h.c1, h.c2, h.c3, h.c4]) {
            let v = hardy_quadrature(&cfg, *which, 1.5).unwrap();
            let want = law.at(1.5);
            assert!((v - want).abs() < 1e-6 * want, "{which:?}: {v} vs {want}");
        }
    }
}
