//! Closed-form constants: sphere areas, the half-sphere angular integral,
//! the weighted Hardy constants and the two-sided bounds on the sharp constant.

mod gamma;
pub mod oracle;

pub use gamma::gamma;
pub(crate) use gamma::gamma_pos;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exponents::ExponentConfig;

/// Surface area of the unit sphere in `R^d`: `2 pi^{d/2} / Gamma(d/2)`.
pub fn sphere_area(d: u32) -> f64 {
    assert!(d >= 1, "sphere_area needs d >= 1");
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma_pos(h)
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume(d: u32) -> f64 {
    sphere_area(d) / d as f64
}

/// `J_sigma = integral over the upper unit half sphere of S^n of (y_{n+1})^{-sigma}`
/// `= pi^{n/2} Gamma((1-sigma)/2) / Gamma((n+1-sigma)/2)`.
#[allow(non_snake_case)]
pub fn angular_J(sigma: f64, n: u32) -> Result<f64> {
    if !sigma.is_finite() {
        return Err(Error::NonFinite("sigma"));
    }
    if sigma >= 1.0 {
        return Err(Error::Divergent(format!(
            "angular integral needs sigma < 1, got {sigma}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let nf = n as f64;
    Ok(PI.powf(nf / 2.0) * gamma_pos((1.0 - sigma) / 2.0) / gamma_pos((nf + 1.0 - sigma) / 2.0))
}

/// Representation-formula constant `C(d) = pi^{d/2} / Gamma(d/2)`, i.e. half
/// the sphere area in the ambient dimension `d`.
pub fn representation_constant(d: u32) -> f64 {
    sphere_area(d) / 2.0
}

/// A constant `c` multiplying `R^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub c: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn at(&self, radius: f64) -> f64 {
        self.c * radius.powf(self.exponent)
    }
}

/// The four region integrals behind the weighted Hardy estimates:
///
/// * `c1`: `int_{|Y|>R} z^{-beta q} |Y|^{-lambda q} dY`
/// * `c2`: `int_{|X|<R} t^{-alpha p'} dX`
/// * `c3`: `int_{|X|>R} t^{-alpha p'} |X|^{-lambda p'} dX`
/// * `c4`: `int_{|Y|<R} z^{-beta q} dY`
///
/// all taken over the upper half space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyConstants {
    pub c1: PowerLaw,
    pub c2: PowerLaw,
    pub c3: PowerLaw,
    pub c4: PowerLaw,
}

/// Tail integral `int_{|Y|>R, y_{n+1}>0} y_{n+1}^{-sigma} |Y|^{-mu}` as a power law.
pub fn tail_power_law(n: u32, sigma: f64, mu: f64) -> Result<PowerLaw> {
    let dim = n as f64 + 1.0;
    let j = angular_J(sigma, n)?;
    let denom = sigma + mu - dim;
    if denom <= 0.0 {
        return Err(Error::Divergent(format!(
            "tail integral needs sigma + mu > n+1, got {}",
            sigma + mu
        )));
    }
    Ok(PowerLaw {
        c: j / denom,
        exponent: -denom,
    })
}

/// Ball integral `int_{|X|<R, t>0} t^{-sigma}` as a power law.
pub fn ball_power_law(n: u32, sigma: f64) -> Result<PowerLaw> {
    let dim = n as f64 + 1.0;
    let j = angular_J(sigma, n)?;
    let denom = dim - sigma;
    if denom <= 0.0 {
        return Err(Error::Divergent(format!("ball integral needs sigma < n+1, got {sigma}")));
    }
    Ok(PowerLaw { c: j / denom, exponent: denom })
}

pub fn hardy_constants(cfg: &ExponentConfig) -> Result<HardyConstants> {
    let pc = cfg.p_conj();
    let q = cfg.q;
    let bq = cfg.beta * q;
    let ap = cfg.alpha * pc;
    Ok(HardyConstants {
        c1: tail_power_law(cfg.n, bq, cfg.lambda * q)?,
        c2: ball_power_law(cfg.n, ap)?,
        c3: tail_power_law(cfg.n, ap, cfg.lambda * pc)?,
        c4: ball_power_law(cfg.n, bq)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HardySide {
    A2,
    A3,
}

/// The Hardy supremum product at radius `radius`; it does not depend on the
/// radius because the exponents cancel under the balance equation.
#[allow(non_snake_case)]
pub fn hardy_A_supremum(cfg: &ExponentConfig, side: HardySide, radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let h = hardy_constants(cfg)?;
    let pc = cfg.p_conj();
    let v = match side {
        HardySide::A2 => h.c1.at(radius).powf(1.0 / cfg.q) * h.c2.at(radius).powf(1.0 / pc),
        HardySide::A3 => h.c4.at(radius).powf(1.0 / cfg.q) * h.c3.at(radius).powf(1.0 / pc),
    };
    Ok(v)
}

/// Upper bound for the sharp unweighted HLS constant in `R^d`.
pub fn hls_upper(d: u32, p: f64, lambda: f64) -> Result<f64> {
    if !p.is_finite() || !lambda.is_finite() {
        return Err(Error::NonFinite("p/lambda"));
    }
    let df = d as f64;
    if d == 0 || !(lambda > 0.0 && lambda < df) || p <= 1.0 {
        return Err(Error::Inadmissible(vec![format!(
            "need 0 < lambda < d and p > 1 (d={d}, p={p}, lambda={lambda})"
        )]));
    }
    let inv_r = 2.0 - 1.0 / p - lambda / df;
    if !(inv_r > 0.0 && inv_r < 1.0) {
        return Err(Error::Inadmissible(vec![format!(
            "conjugate exponent 1/r = {inv_r} outside (0, 1)"
        )]));
    }
    let r = 1.0 / inv_r;
    let e = lambda / df;
    let w = sphere_area(d);
    let bracket = (p * lambda / (df * (p - 1.0))).powf(e) + (r * lambda / (df * (r - 1.0))).powf(e);
    Ok(df / (p * r * (df - lambda)) * (w / df).powf(e) * bracket)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// `max{d1, d2, d3}`
    pub lower: f64,
    /// `min{(p')^{1/p'} p^{1/p} d1, (p')^{1/p'} p^{1/p} d2}`
    pub upper: f64,
    pub hls_upper: Option<f64>,
    /// `d3` uses `hls_upper` in place of the exact HLS constant.
    pub d3_upper_bound_surrogate: bool,
    pub attainment_note: String,
    pub hardy: HardyConstants,
}

/// `(p')^{1/p'} p^{1/p}`.
pub fn upper_factor(p: f64) -> f64 {
    let pc = p / (p - 1.0);
    pc.powf(1.0 / pc) * p.powf(1.0 / p)
}

pub fn bounds_report(cfg: &ExponentConfig) -> Result<BoundsReport> {
    let h = hardy_constants(cfg)?;
    let pc = cfg.p_conj();
    let q = cfg.q;
    let d1 = h.c1.c.powf(1.0 / q) * h.c2.c.powf(1.0 / pc);
    let d2 = h.c3.c.powf(1.0 / pc) * h.c4.c.powf(1.0 / q);

    let nf = cfg.n as f64;
    let a = ((2f64.powi(cfg.n as i32) - 1.0) * sphere_area(cfg.n) / nf).powf(1.0 / q);
    let shell = (2f64.powi(cfg.n as i32) - 2f64.powi(-(cfg.n as i32 + 2))) * sphere_area(cfg.n + 1)
        / (nf + 1.0);
    let third = 2f64.powf(cfg.lambda) * shell.powf(1.0 / pc) * a;
    let hls = hls_upper(cfg.n + 1, cfg.p, cfg.lambda).ok();
    let mut d3 = a.max(third);
    if let Some(nh) = hls {
        d3 = d3.max(a * nh);
    }

    let f = upper_factor(cfg.p);
    let attainment_note = match cfg.attainment() {
        crate::exponents::Attainment::Attained => "p < q with nonzero weights: extremals attained",
        crate::exponents::Attainment::NotAttainedZeroWeights => {
            "alpha = beta = 0: the sharp constant is not attained"
        }
        crate::exponents::Attainment::NotExpectedPEqualsQ => {
            "p = q: extremals are not expected to be attained"
        }
        crate::exponents::Attainment::Unknown => "alpha = -beta != 0: attainment unknown",
    };
    Ok(BoundsReport {
        d1,
        d2,
        d3,
        lower: d1.max(d2).max(d3),
        upper: (f * d1).min(f * d2),
        hls_upper: hls,
        d3_upper_bound_surrogate: hls.is_some(),
        attainment_note: attainment_note.to_string(),
        hardy: h,
    })
}

/// `D1` and `D2` written directly in `(p, r)`, without passing through the
/// Hardy constants. The raw denominators `r(n+1-beta-lambda)-(n+1)` and
/// `p(n+1-alpha-lambda)-(n+1)` are negative on admissible tuples, so their
/// absolute values are used.
pub fn d_constants_in_r(cfg: &ExponentConfig) -> (f64, f64) {
    let n1 = cfg.dim();
    let (p, r, a, b, l) = (cfg.p, cfg.r, cfg.alpha, cfg.beta, cfg.lambda);
    let pin = PI.powf(cfg.n as f64 / 2.0);
    let gr = gamma_pos((r * (1.0 - b) - 1.0) / (2.0 * (r - 1.0)))
        / gamma_pos((r * (n1 - b) - n1) / (2.0 * (r - 1.0)));
    let gp = gamma_pos((p * (1.0 - a) - 1.0) / (2.0 * (p - 1.0)))
        / gamma_pos((p * (n1 - a) - n1) / (2.0 * (p - 1.0)));
    let er = (r - 1.0) / r;
    let ep = (p - 1.0) / p;
    let d1 = ((r - 1.0) * pin / (r * (n1 - b - l) - n1).abs() * gr).powf(er)
        * ((p - 1.0) * pin / (p * (n1 - a) - n1) * gp).powf(ep);
    let d2 = ((r - 1.0) * pin / (r * (n1 - b) - n1) * gr).powf(er)
        * ((p - 1.0) * pin / (p * (n1 - a - l) - n1).abs() * gp).powf(ep);
    (d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> ExponentConfig {
        ExponentConfig::try_new(1, 1.0, 0.1, 0.1, 10.0 / 7.0, 10.0 / 7.0).unwrap()
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((representation_constant(2) - PI).abs() < 1e-13);
    }

    #[test]
    fn angular_values() {
        assert!((angular_J(0.0, 1).unwrap() - PI).abs() < 1e-13);
        assert!((angular_J(0.0, 2).unwrap() - 2.0 * PI).abs() < 1e-13);
        // sqrt(pi) Gamma(1/4) / Gamma(3/4)
        assert!((angular_J(0.5, 1).unwrap() - 5.244_115_108_584_24).abs() < 1e-11);
        assert!(angular_J(1.0, 1).is_err());
    }

    #[test]
    fn half_disk_constants() {
        let cfg = ExponentConfig::try_new(1, 1.0, 0.0, 0.0, 4.0 / 3.0, 4.0 / 3.0).unwrap();
        let h = hardy_constants(&cfg).unwrap();
        assert!((h.c2.c - PI / 2.0).abs() < 1e-13);
        assert!((h.c2.exponent - 2.0).abs() < 1e-14);
        assert!((h.c1.c - PI / 2.0).abs() < 1e-13);
        assert!((h.c1.exponent + 2.0).abs() < 1e-13);
        let a2 = hardy_A_supremum(&cfg, HardySide::A2, 1.0).unwrap();
        assert!((a2 - (PI / 2.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn hls_reference_value() {
        let v = hls_upper(2, 4.0 / 3.0, 1.0).unwrap();
        assert!((v - 9.0 * (2.0 * PI).sqrt() / 4.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn hls_is_symmetric_in_p_and_r() {
        let d = 3;
        let lambda = 1.3;
        let p = 1.4;
        let r = 1.0 / (2.0 - 1.0 / p - lambda / d as f64);
        let a = hls_upper(d, p, lambda).unwrap();
        let b = hls_upper(d, r, lambda).unwrap();
        assert!((a - b).abs() / a < 1e-12);
    }

    #[test]
    fn baseline_bounds_are_finite_and_positive() {
        let b = bounds_report(&baseline()).unwrap();
        for v in [b.d1, b.d2, b.d3, b.lower, b.upper] {
            assert!(v.is_finite() && v > 0.0);
        }
        let f = upper_factor(10.0 / 7.0);
        assert!(((b.upper / b.d1.min(b.d2)) - f).abs() < 1e-12);
        assert!(b.d3_upper_bound_surrogate);
    }

    #[test]
    fn r_form_matches_q_form() {
        let cfg = baseline();
        let b = bounds_report(&cfg).unwrap();
        let (d1, d2) = d_constants_in_r(&cfg);
        assert!((d1 - b.d1).abs() / b.d1 < 1e-10);
        assert!((d2 - b.d2).abs() / b.d2 < 1e-10);
    }
}
