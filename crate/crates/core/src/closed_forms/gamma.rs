//! Lanczos approximation of the Gamma function on the positive half line.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Gamma(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("x"));
    }
    if x <= 0.0 {
        return Err(Error::InvalidArgument(format!("gamma requires x > 0, got {x}")));
    }
    Ok(gamma_pos(x))
}

/// Unchecked variant for internal callers that already validated `x > 0`.
pub(crate) fn gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // shift up once: Gamma(x) = Gamma(x + 1) / x
        return lanczos(x + 1.0) / x;
    }
    lanczos(x)
}

fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    // split the power so that large arguments do not overflow early
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * std::f64::consts::PI).sqrt() * half * (-t).exp() * half * a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_and_factorial_values() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let cases = [(0.5, sqrt_pi), (1.5, 0.5 * sqrt_pi), (5.0, 24.0), (1.0, 1.0), (2.0, 1.0)];
        for (x, want) in cases {
            let got = gamma(x).unwrap();
            assert!((got - want).abs() / want < 1e-13, "Gamma({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn factorials_up_to_fifty() {
        let mut fact = 1.0f64;
        for k in 1..50u32 {
            let got = gamma(k as f64 + 1.0).unwrap();
            fact *= k as f64;
            assert!((got - fact).abs() / fact < 1e-12, "Gamma({}) = {got}", k + 1);
        }
    }

    #[test]
    fn small_arguments() {
        // Gamma(x) ~ 1/x - euler_gamma near zero
        let x = 1e-3;
        let want = 999.423_772_484_595_5;
        assert!((gamma(x).unwrap() - want).abs() / want < 1e-12);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
        assert!(gamma(f64::NAN).is_err());
    }
}
