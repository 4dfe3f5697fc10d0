use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::grid::{Field, HalfSpaceGrid};
use crate::error::{Error, Result};

/// Closed-form test functions on the half space. Points are slices of length
/// `n + 1` with `t` last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FuncSpec {
    /// `exp(-|X - center|^2 / width^2)`, peak value 1.
    GaussianBump { center: Vec<f64>, width: f64 },
    /// `c (|X - center|^2 + d^2)^(-exponent)`.
    Bubble {
        c: f64,
        d: f64,
        center: Vec<f64>,
        exponent: f64,
    },
    /// `exp(-s rho^2 / (1 - rho^2))` with `rho = |X - center| / radius`,
    /// zero outside the ball; smooth with peak value 1.
    CutoffBump {
        center: Vec<f64>,
        radius: f64,
        smoothness: f64,
    },
    /// `tau^(-power) inner(X / tau)`.
    Scaled {
        inner: Box<FuncSpec>,
        tau: f64,
        power: f64,
    },
    Sum { terms: Vec<FuncSpec> },
    Product { factors: Vec<FuncSpec> },
    /// Constant times another spec.
    Multiple { factor: f64, inner: Box<FuncSpec> },
}

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl FuncSpec {
    pub fn gaussian(center: &[f64], width: f64) -> Self {
        FuncSpec::GaussianBump {
            center: center.to_vec(),
            width,
        }
    }

    pub fn bubble(c: f64, d: f64, center: &[f64], exponent: f64) -> Self {
        FuncSpec::Bubble {
            c,
            d,
            center: center.to_vec(),
            exponent,
        }
    }

    pub fn cutoff(center: &[f64], radius: f64, smoothness: f64) -> Self {
        FuncSpec::CutoffBump {
            center: center.to_vec(),
            radius,
            smoothness,
        }
    }

    pub fn scaled(self, tau: f64, power: f64) -> Self {
        FuncSpec::Scaled {
            inner: Box::new(self),
            tau,
            power,
        }
    }

    pub fn times(self, factor: f64) -> Self {
        FuncSpec::Multiple {
            factor,
            inner: Box::new(self),
        }
    }

    /// Checks positivity of widths and exponents and that every center has
    /// `dim` coordinates.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_center = |c: &[f64]| {
            if c.len() != dim {
                Err(Error::InvalidArgument(format!(
                    "center has {} coordinates, expected {dim}",
                    c.len()
                )))
            } else if c.iter().any(|v| !v.is_finite()) {
                Err(Error::NonFinite("center"))
            } else {
                Ok(())
            }
        };
        match self {
            FuncSpec::GaussianBump { center, width } => {
                check_center(center)?;
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidArgument("gaussian width must be positive".into()));
                }
            }
            FuncSpec::Bubble {
                c,
                d,
                center,
                exponent,
            } => {
                check_center(center)?;
                if !(*d > 0.0 && d.is_finite()) || !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "bubble needs d > 0 and exponent > 0".into(),
                    ));
                }
                if !c.is_finite() {
                    return Err(Error::NonFinite("c"));
                }
            }
            FuncSpec::CutoffBump {
                center,
                radius,
                smoothness,
            } => {
                check_center(center)?;
                if !(*radius > 0.0 && radius.is_finite()) || !(*smoothness > 0.0 && smoothness.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "cutoff bump needs radius > 0 and smoothness > 0".into(),
                    ));
                }
            }
            FuncSpec::Scaled { inner, tau, power } => {
                if !(*tau > 0.0 && tau.is_finite()) || !power.is_finite() {
                    return Err(Error::InvalidArgument("scaling needs tau > 0".into()));
                }
                inner.validate(dim)?;
            }
            FuncSpec::Sum { terms } => {
                for t in terms {
                    t.validate(dim)?;
                }
            }
            FuncSpec::Product { factors } => {
                for t in factors {
                    t.validate(dim)?;
                }
            }
            FuncSpec::Multiple { factor, inner } => {
                if !factor.is_finite() {
                    return Err(Error::NonFinite("factor"));
                }
                inner.validate(dim)?;
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            FuncSpec::GaussianBump { center, width } => (-dist2(x, center) / (width * width)).exp(),
            FuncSpec::Bubble {
                c,
                d,
                center,
                exponent,
            } => c * (dist2(x, center) + d * d).powf(-exponent),
            FuncSpec::CutoffBump {
                center,
                radius,
                smoothness,
            } => {
                let rho2 = dist2(x, center) / (radius * radius);
                if rho2 >= 1.0 {
                    0.0
                } else {
                    (-smoothness * rho2 / (1.0 - rho2)).exp()
                }
            }
            FuncSpec::Scaled { inner, tau, power } => {
                let y: Vec<f64> = x.iter().map(|v| v / tau).collect();
                tau.powf(-power) * inner.value(&y)
            }
            FuncSpec::Sum { terms } => terms.iter().map(|t| t.value(x)).sum(),
            FuncSpec::Product { factors } => factors.iter().map(|t| t.value(x)).product(),
            FuncSpec::Multiple { factor, inner } => factor * inner.value(x),
        }
    }

    /// Analytic gradient, written into `out` (length `n + 1`).
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match self {
            FuncSpec::GaussianBump { center, width } => {
                let v = self.value(x);
                let s = -2.0 * v / (width * width);
                for k in 0..x.len() {
                    out[k] = s * (x[k] - center[k]);
                }
            }
            FuncSpec::Bubble {
                c,
                d,
                center,
                exponent,
            } => {
                let base = dist2(x, center) + d * d;
                let s = -2.0 * exponent * c * base.powf(-exponent - 1.0);
                for k in 0..x.len() {
                    out[k] = s * (x[k] - center[k]);
                }
            }
            FuncSpec::CutoffBump {
                center,
                radius,
                smoothness,
            } => {
                let r2 = radius * radius;
                let rho2 = dist2(x, center) / r2;
                if rho2 < 1.0 {
                    let om = 1.0 - rho2;
                    let v = (-smoothness * rho2 / om).exp();
                    // d/d(rho2) of -s rho2/(1-rho2) is -s/(1-rho2)^2
                    let s = v * (-smoothness / (om * om)) * 2.0 / r2;
                    for k in 0..x.len() {
                        out[k] = s * (x[k] - center[k]);
                    }
                }
            }
            FuncSpec::Scaled { inner, tau, power } => {
                let y: Vec<f64> = x.iter().map(|v| v / tau).collect();
                inner.gradient(&y, out);
                let s = tau.powf(-power) / tau;
                out.iter_mut().for_each(|v| *v *= s);
            }
            FuncSpec::Sum { terms } => {
                let mut tmp = vec![0.0; x.len()];
                for t in terms {
                    t.gradient(x, &mut tmp);
                    for k in 0..x.len() {
                        out[k] += tmp[k];
                    }
                }
            }
            FuncSpec::Product { factors } => {
                let vals: Vec<f64> = factors.iter().map(|f| f.value(x)).collect();
                let mut tmp = vec![0.0; x.len()];
                for (i, f) in factors.iter().enumerate() {
                    let others: f64 = vals
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, v)| v)
                        .product();
                    if others == 0.0 {
                        continue;
                    }
                    f.gradient(x, &mut tmp);
                    for k in 0..x.len() {
                        out[k] += others * tmp[k];
                    }
                }
            }
            FuncSpec::Multiple { factor, inner } => {
                inner.gradient(x, out);
                out.iter_mut().for_each(|v| *v *= factor);
            }
        }
    }

    /// Radius of a ball (about `support_center`) containing the support, if
    /// the function is compactly supported.
    pub fn support_ball(&self) -> Option<(Vec<f64>, f64)> {
        match self {
            FuncSpec::CutoffBump { center, radius, .. } => Some((center.clone(), *radius)),
            FuncSpec::Scaled { inner, tau, .. } => inner
                .support_ball()
                .map(|(c, r)| (c.iter().map(|v| v * tau).collect(), r * tau)),
            FuncSpec::Product { factors } => factors.iter().find_map(|f| f.support_ball()),
            FuncSpec::Multiple { inner, .. } => inner.support_ball(),
            FuncSpec::Sum { terms } => {
                let balls: Option<Vec<_>> = terms.iter().map(|t| t.support_ball()).collect();
                let balls = balls?;
                let first = balls.first()?.0.clone();
                let r = balls
                    .iter()
                    .map(|(c, r)| dist2(c, &first).sqrt() + r)
                    .fold(0.0, f64::max);
                Some((first, r))
            }
            _ => None,
        }
    }
}

/// Samples `spec` at every node of `grid`.
pub fn sample(spec: &FuncSpec, grid: &Arc<HalfSpaceGrid>) -> Field {
    let values = (0..grid.len()).map(|i| spec.value(&grid.point(i))).collect();
    Field {
        grid: grid.clone(),
        values,
        symmetry_hint: Default::default(),
    }
}

/// Nonnegative test functions sized for a box with `x_extent = t_max = 4`,
/// in `n + 1` dimensions (`n = 1, 2`); the second x-coordinate of every
/// center is 0.
pub fn test_library(n: u32) -> Vec<(&'static str, FuncSpec)> {
    let at = |x: f64, t: f64| -> Vec<f64> {
        let mut c = vec![x];
        c.extend(std::iter::repeat_n(0.0, n as usize - 1));
        c.push(t);
        c
    };
    vec![
        ("gaussian_centered", FuncSpec::gaussian(&at(0.0, 1.0), 1.0)),
        ("gaussian_narrow", FuncSpec::gaussian(&at(0.0, 0.6), 0.4)),
        ("gaussian_off_axis", FuncSpec::gaussian(&at(1.2, 1.0), 0.8)),
        ("gaussian_wide", FuncSpec::gaussian(&at(0.0, 1.5), 1.5)),
        ("bubble_boundary", FuncSpec::bubble(1.0, 1.0, &at(0.0, 0.0), 1.5)),
        ("bubble_interior", FuncSpec::bubble(1.0, 0.5, &at(0.0, 1.0), 1.0)),
        ("cutoff_bump", FuncSpec::cutoff(&at(0.0, 1.5), 1.4, 1.0)),
        (
            "two_gaussians",
            FuncSpec::Sum {
                terms: vec![
                    FuncSpec::gaussian(&at(-1.0, 1.0), 0.6),
                    FuncSpec::gaussian(&at(1.0, 1.0), 0.6),
                ],
            },
        ),
        (
            "gaussian_times_cutoff",
            FuncSpec::Product {
                factors: vec![
                    FuncSpec::gaussian(&at(0.0, 0.8), 1.0),
                    FuncSpec::cutoff(&at(0.0, 1.0), 2.0, 0.5),
                ],
            },
        ),
    ]
}
