use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use swlab::diagnostics::BallGridSpec;
use swlab::discretization::{FuncSpec, GridSpec};
use swlab::exponents::{solve_r, validate_primal, AdmissibilityReport};
use swlab::extremal::{DEFAULT_ANDERSON, DEFAULT_MAX_ITER, DEFAULT_TOL};
use swlab::sobolev::WsOptions;
use swlab::ExponentConfig;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A real number given either as a JSON number or as a `"num/den"` string,
/// so that exponents like `10/7` survive without rounding in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Real {
    Number(f64),
    Text(String),
}

impl Real {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            Real::Number(v) => Ok(*v),
            Real::Text(s) => parse_real(s).ok_or_else(|| CliError::Usage(format!("cannot parse `{s}` as a number"))),
        }
    }
}

fn parse_real(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.trim().parse().ok(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentInput {
    pub n: i64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p: Real,
    /// Solved from the balance equation when absent.
    #[serde(default)]
    pub r: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateParams {
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_anderson")]
    pub anderson: usize,
    /// Initial guess; a Gaussian off the symmetry axis by default.
    #[serde(default)]
    pub init: Option<FuncSpec>,
    /// Relative amplitude of the seeded multiplicative noise on the initial field.
    #[serde(default)]
    pub perturbation: f64,
    /// Where the CSV trace goes; next to `--out` when absent.
    #[serde(default)]
    pub trace: Option<PathBuf>,
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_anderson() -> usize {
    DEFAULT_ANDERSON
}

impl Default for EstimateParams {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            anderson: DEFAULT_ANDERSON,
            init: None,
            perturbation: 0.0,
            trace: None,
        }
    }
}

/// Resolutions of the individual check suites; absent entries fall back to
/// sizes tuned for the `n = 1` baseline.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckParams {
    #[serde(default)]
    pub suites: Option<Vec<String>>,
    #[serde(default)]
    pub kelvin_half: Option<GridSpec>,
    #[serde(default)]
    pub kelvin_ball: Option<BallGridSpec>,
    #[serde(default)]
    pub scaling_grid: Option<GridSpec>,
    #[serde(default)]
    pub representation_grid: Option<GridSpec>,
    #[serde(default)]
    pub duality_fields: Option<usize>,
    #[serde(default)]
    pub mc_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SobolevParams {
    #[serde(default = "default_sobolev_n")]
    pub n: u32,
    pub p: Real,
    pub alpha1: f64,
    pub beta1: f64,
    /// Test functions; the built-in set when absent.
    #[serde(default)]
    pub functions: Option<Vec<FuncSpec>>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub quadrature: Option<WsOptions>,
}

fn default_sobolev_n() -> u32 {
    1
}

fn default_tau() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub exponents: ExponentInput,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub estimate: EstimateParams,
    #[serde(default)]
    pub check: CheckParams,
    #[serde(default)]
    pub sobolev: Option<SobolevParams>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses and schema-checks a config document; no computation happens here.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "config schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        let e = &cfg.exponents;
        e.p.value()?;
        if let Some(r) = &e.r {
            r.value()?;
        }
        if let Some(g) = &cfg.grid {
            if g.n as i64 != e.n {
                return Err(CliError::Usage(format!("grid.n = {} but exponents.n = {}", g.n, e.n)));
            }
        }
        if let Some(s) = &cfg.sobolev {
            s.p.value()?;
        }
        Ok(cfg)
    }

    /// `(n, lambda, alpha, beta, p, r)` with `r` solved when absent; `r` is
    /// NaN when the balance equation has no admissible solution.
    pub fn raw_tuple(&self) -> Result<(i64, f64, f64, f64, f64, f64), CliError> {
        let e = &self.exponents;
        let p = e.p.value()?;
        let r = match &e.r {
            Some(r) => r.value()?,
            None => u32::try_from(e.n)
                .ok()
                .and_then(|n| solve_r(n, e.lambda, e.alpha, e.beta, p).ok())
                .unwrap_or(f64::NAN),
        };
        Ok((e.n, e.lambda, e.alpha, e.beta, p, r))
    }

    pub fn admissibility(&self) -> Result<AdmissibilityReport, CliError> {
        let (n, lambda, alpha, beta, p, r) = self.raw_tuple()?;
        Ok(validate_primal(n, lambda, alpha, beta, p, r))
    }

    pub fn exponent_config(&self) -> Result<ExponentConfig, CliError> {
        let (n, lambda, alpha, beta, p, r) = self.raw_tuple()?;
        let n = u32::try_from(n).map_err(|_| CliError::Rejected(format!("n = {n} must be a positive integer")))?;
        Ok(ExponentConfig::try_new(n, lambda, alpha, beta, p, r)?)
    }

    /// The configured grid, or `x_extent = t_max = 4`, grading 2 and 64
    /// (`n = 1`) or 24 (`n = 2`) cells per axis.
    pub fn grid_or_default(&self, n: u32) -> GridSpec {
        self.grid.unwrap_or(GridSpec {
            n,
            x_extent: 4.0,
            t_max: 4.0,
            nx: if n == 1 { 64 } else { 24 },
            nt: if n == 1 { 64 } else { 24 },
            grading: 2.0,
        })
    }
}
