//! Exponent tuples, derived exponents and the admissibility predicates of the
//! weighted inequality and its Euler-Lagrange system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the balance equation.
pub const BALANCE_TOL: f64 = 1e-12;

/// The primal tuple `(n, lambda, alpha, beta, p, r)` together with the dual
/// exponent `q = r'`.
///
/// Values of this type are only produced by [`ExponentConfig::try_new`] and
/// friends, so every instance satisfies the admissibility system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentConfig {
    pub n: u32,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub r: f64,
    pub q: f64,
}

/// Extremal attainment metadata attached to an admissible tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attainment {
    /// `p < q` and the weights are not both zero: extremals exist.
    Attained,
    /// `alpha = beta = 0`: the sharp constant is not attained.
    NotAttainedZeroWeights,
    /// `p = q`: extremals are not expected to exist.
    NotExpectedPEqualsQ,
    /// `alpha = -beta != 0`: not settled either way.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub name: String,
    pub detail: String,
}

/// Outcome of [`validate_primal`]. Always produced, even for garbage input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub balance_residual: f64,
    pub q: Option<f64>,
    pub attainment: Option<Attainment>,
}

impl AdmissibilityReport {
    pub fn violated(&self, name: &str) -> bool {
        self.violations.iter().any(|v| v.name == name)
    }
}

pub const V_FINITE: &str = "finite inputs";
pub const V_N: &str = "n >= 1";
pub const V_LAMBDA: &str = "0 < lambda < n+1";
pub const V_P: &str = "p > 1";
pub const V_R: &str = "r > 1";
pub const V_ALPHA: &str = "alpha < 1/p'";
pub const V_BETA: &str = "beta < 1/r'";
pub const V_SUM: &str = "alpha + beta >= 0";
pub const V_BALANCE: &str = "1/p + 1/r + (alpha+beta+lambda)/(n+1) = 2";
pub const V_P_LE_Q: &str = "p <= q";

/// Checks every condition of the primal exponent system and lists the ones
/// that fail. Total: never panics, never errors.
pub fn validate_primal(n: i64, lambda: f64, alpha: f64, beta: f64, p: f64, r: f64) -> AdmissibilityReport {
    let mut violations = Vec::new();
    let mut push = |name: &str, detail: String| {
        violations.push(Violation {
            name: name.to_string(),
            detail,
        })
    };
    let inputs = [lambda, alpha, beta, p, r];
    if inputs.iter().any(|v| !v.is_finite()) {
        push(V_FINITE, format!("lambda={lambda}, alpha={alpha}, beta={beta}, p={p}, r={r}"));
        return AdmissibilityReport {
            valid: false,
            violations,
            balance_residual: f64::NAN,
            q: None,
            attainment: None,
        };
    }
    let nn = n as f64 + 1.0;
    if n < 1 {
        push(V_N, format!("n = {n}"));
    }
    if !(lambda > 0.0 && lambda < nn) {
        push(V_LAMBDA, format!("lambda = {lambda}, n+1 = {nn}"));
    }
    if p <= 1.0 {
        push(V_P, format!("p = {p}"));
    }
    if r <= 1.0 {
        push(V_R, format!("r = {r}"));
    }
    if p > 1.0 {
        let bound = (p - 1.0) / p;
        if alpha >= bound {
            push(V_ALPHA, format!("alpha = {alpha} >= 1/p' = {bound}"));
        }
    }
    if r > 1.0 {
        let bound = (r - 1.0) / r;
        if beta >= bound {
            push(V_BETA, format!("beta = {beta} >= 1/r' = {bound}"));
        }
    }
    if alpha + beta < 0.0 {
        push(V_SUM, format!("alpha + beta = {}", alpha + beta));
    }
    let balance_residual = 1.0 / p + 1.0 / r + (alpha + beta + lambda) / nn - 2.0;
    if balance_residual.abs() > BALANCE_TOL {
        push(V_BALANCE, format!("residual = {balance_residual:e}"));
    }
    let q = if r > 1.0 { Some(r / (r - 1.0)) } else { None };
    if let Some(q) = q {
        if p > 1.0 && p > q * (1.0 + 1e-14) {
            push(V_P_LE_Q, format!("p = {p} > q = {q}"));
        }
    }
    let valid = violations.is_empty();
    let attainment = if valid { q.map(|q| attainment(alpha, beta, p, q)) } else { None };
    AdmissibilityReport {
        valid,
        violations,
        balance_residual,
        q,
        attainment,
    }
}

fn attainment(alpha: f64, beta: f64, p: f64, q: f64) -> Attainment {
    if alpha == 0.0 && beta == 0.0 {
        Attainment::NotAttainedZeroWeights
    } else if (q - p).abs() <= 1e-12 * q {
        Attainment::NotExpectedPEqualsQ
    } else if alpha + beta == 0.0 {
        Attainment::Unknown
    } else {
        Attainment::Attained
    }
}

impl ExponentConfig {
    /// Builds an admissible tuple or reports every violated condition.
    pub fn try_new(n: u32, lambda: f64, alpha: f64, beta: f64, p: f64, r: f64) -> Result<Self> {
        let report = validate_primal(n as i64, lambda, alpha, beta, p, r);
        if !report.valid {
            return Err(Error::Inadmissible(
                report
                    .violations
                    .iter()
                    .map(|v| format!("{} ({})", v.name, v.detail))
                    .collect(),
            ));
        }
        let cfg = Self {
            n,
            lambda,
            alpha,
            beta,
            p,
            r,
            q: r / (r - 1.0),
        };
        to_dual(&cfg)
    }

    /// Solves `r` from the balance equation and validates the result.
    pub fn from_balance(n: u32, lambda: f64, alpha: f64, beta: f64, p: f64) -> Result<Self> {
        let r = solve_r(n, lambda, alpha, beta, p)?;
        Self::try_new(n, lambda, alpha, beta, p, r)
    }

    pub fn report(&self) -> AdmissibilityReport {
        validate_primal(self.n as i64, self.lambda, self.alpha, self.beta, self.p, self.r)
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> f64 {
        self.n as f64 + 1.0
    }

    /// Hölder conjugate `p' = p / (p - 1)`.
    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// The tuple with the roles of `(alpha, p)` and `(beta, r)` exchanged,
    /// which governs the adjoint operator.
    pub fn swapped(&self) -> Result<Self> {
        Self::try_new(self.n, self.lambda, self.beta, self.alpha, self.r, self.p)
    }

    pub fn attainment(&self) -> Attainment {
        attainment(self.alpha, self.beta, self.p, self.q)
    }
}

/// `r` determined by `1/p + 1/r + (alpha+beta+lambda)/(n+1) = 2`.
pub fn solve_r(n: u32, lambda: f64, alpha: f64, beta: f64, p: f64) -> Result<f64> {
    for (name, v) in [("lambda", lambda), ("alpha", alpha), ("beta", beta), ("p", p)] {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    let inv_r = 2.0 - 1.0 / p - (alpha + beta + lambda) / (n as f64 + 1.0);
    if !(inv_r > 0.0 && inv_r < 1.0) {
        return Err(Error::Inadmissible(vec![format!(
            "{V_R} (balance forces 1/r = {inv_r})"
        )]));
    }
    Ok(1.0 / inv_r)
}

/// Recomputes `q = r/(r-1)` and asserts the dual-form identity
/// `1/q = 1/p - (n+1-(alpha+beta+lambda))/(n+1)`.
pub fn to_dual(cfg: &ExponentConfig) -> Result<ExponentConfig> {
    if cfg.r <= 1.0 || !cfg.r.is_finite() {
        return Err(Error::InvalidArgument(format!("r = {} must exceed 1", cfg.r)));
    }
    let q = cfg.r / (cfg.r - 1.0);
    let nn = cfg.dim();
    let rhs = 1.0 / cfg.p - (nn - (cfg.alpha + cfg.beta + cfg.lambda)) / nn;
    if (1.0 / q - rhs).abs() > BALANCE_TOL {
        return Err(Error::Inadmissible(vec![format!(
            "dual identity 1/q = {} but 1/p - (n+1-(alpha+beta+lambda))/(n+1) = {rhs}",
            1.0 / q
        )]));
    }
    Ok(ExponentConfig { q, ..*cfg })
}

/// Exponents of the `(u, v)` form of the Euler-Lagrange system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElExponents {
    /// `1/(p-1)`
    pub theta: f64,
    /// `q-1`
    pub kappa: f64,
}

pub fn el_exponents(cfg: &ExponentConfig) -> Result<ElExponents> {
    let theta = 1.0 / (cfg.p - 1.0);
    let kappa = cfg.q - 1.0;
    let mut failed = Vec::new();
    if kappa * theta < 1.0 - 1e-12 {
        failed.push(format!("kappa*theta = {} < 1", kappa * theta));
    }
    if cfg.alpha >= 1.0 / (theta + 1.0) {
        failed.push("alpha < 1/(theta+1)".to_string());
    }
    if cfg.beta >= 1.0 / (kappa + 1.0) {
        failed.push("beta < 1/(kappa+1)".to_string());
    }
    let lhs = 1.0 / (theta + 1.0) + 1.0 / (kappa + 1.0);
    let rhs = (cfg.alpha + cfg.beta + cfg.lambda) / cfg.dim();
    if (lhs - rhs).abs() > 1e-12 {
        failed.push(format!("1/(theta+1) + 1/(kappa+1) = {lhs} != {rhs}"));
    }
    if failed.is_empty() {
        Ok(ElExponents { theta, kappa })
    } else {
        Err(Error::Inadmissible(failed))
    }
}

/// Exponents singled out by invariance under inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalData {
    pub n: u32,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p_alpha: f64,
    pub r_beta: f64,
    pub kappa_star: f64,
    pub theta_star: f64,
    /// `mu1` evaluated at `kappa_star` (zero up to rounding).
    pub mu1: f64,
    /// `mu2` evaluated at `theta_star` (zero up to rounding).
    pub mu2: f64,
}

impl ConformalData {
    /// `mu1 = 2n+2 - (kappa+1)(lambda+2 beta)`.
    pub fn mu1_at(&self, kappa: f64) -> f64 {
        2.0 * self.n as f64 + 2.0 - (kappa + 1.0) * (self.lambda + 2.0 * self.beta)
    }

    /// `mu2 = 2n+2 - (theta+1)(lambda+2 alpha)`.
    pub fn mu2_at(&self, theta: f64) -> f64 {
        2.0 * self.n as f64 + 2.0 - (theta + 1.0) * (self.lambda + 2.0 * self.alpha)
    }

    /// The admissible tuple `(p_alpha, r_beta)` itself.
    pub fn config(&self) -> Result<ExponentConfig> {
        ExponentConfig::try_new(self.n, self.lambda, self.alpha, self.beta, self.p_alpha, self.r_beta)
    }

    /// Exponent of the boundary profile of `f` (first component).
    pub fn f_boundary_exponent(&self) -> f64 {
        (2.0 * (self.n as f64 + 1.0) - self.lambda - 2.0 * self.alpha) / 2.0
    }

    /// Exponent of the boundary profile of `g` (second component).
    pub fn g_boundary_exponent(&self) -> f64 {
        (2.0 * (self.n as f64 + 1.0) - self.lambda - 2.0 * self.beta) / 2.0
    }
}

pub fn conformal_exponents(n: u32, lambda: f64, alpha: f64, beta: f64) -> Result<ConformalData> {
    for (name, v) in [("lambda", lambda), ("alpha", alpha), ("beta", beta)] {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    let two_d = 2.0 * (n as f64 + 1.0);
    let mut failed = Vec::new();
    if lambda + 2.0 * alpha <= 0.0 {
        failed.push("lambda + 2 alpha > 0".to_string());
    }
    if lambda + 2.0 * beta <= 0.0 {
        failed.push("lambda + 2 beta > 0".to_string());
    }
    if two_d - lambda - 2.0 * alpha <= 0.0 {
        failed.push("2(n+1) - lambda - 2 alpha > 0".to_string());
    }
    if two_d - lambda - 2.0 * beta <= 0.0 {
        failed.push("2(n+1) - lambda - 2 beta > 0".to_string());
    }
    if !failed.is_empty() {
        return Err(Error::Inadmissible(failed));
    }
    let p_alpha = two_d / (two_d - lambda - 2.0 * alpha);
    let r_beta = two_d / (two_d - lambda - 2.0 * beta);
    let kappa_star = (two_d - lambda - 2.0 * beta) / (lambda + 2.0 * beta);
    let theta_star = (two_d - lambda - 2.0 * alpha) / (lambda + 2.0 * alpha);
    let mut data = ConformalData {
        n,
        lambda,
        alpha,
        beta,
        p_alpha,
        r_beta,
        kappa_star,
        theta_star,
        mu1: 0.0,
        mu2: 0.0,
    };
    data.mu1 = data.mu1_at(kappa_star);
    data.mu2 = data.mu2_at(theta_star);
    Ok(data)
}

/// Sobolev exponent `p*_m` and the exponent windows that make the weighted
/// Sobolev inequality of order `m` available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevExponent {
    pub n: u32,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub m: u32,
    pub p_star: f64,
    /// `pn/p* - (n+1-mp)`
    pub alpha_lower: f64,
    /// `p - 1`
    pub alpha_upper: f64,
    /// `alpha (n+1)/(n+1-mp)`
    pub beta_upper: f64,
    pub alpha_window: bool,
    pub beta_window: bool,
    /// `p < p*` strictly; the window is empty when `p = p*`.
    pub p_below_p_star: bool,
}

impl SobolevExponent {
    pub fn in_window(&self) -> bool {
        self.alpha_window && self.beta_window && self.p_below_p_star
    }
}

pub fn sobolev_exponent(n: u32, p: f64, alpha: f64, beta: f64, m: u32) -> Result<SobolevExponent> {
    for (name, v) in [("p", p), ("alpha", alpha), ("beta", beta)] {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    if m == 0 {
        return Err(Error::InvalidArgument("order m must be positive".into()));
    }
    if p <= 1.0 {
        return Err(Error::InvalidArgument(format!("p = {p} must exceed 1")));
    }
    let nn = n as f64 + 1.0;
    let mp = m as f64 * p;
    if mp >= nn {
        return Err(Error::InvalidArgument(format!("m p = {mp} must be below n+1 = {nn}")));
    }
    let denom = nn + alpha - mp;
    if denom <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "n+1+alpha-mp = {denom} must be positive"
        )));
    }
    let p_star = p * (nn + beta) / denom;
    let alpha_lower = p * n as f64 / p_star - (nn - mp);
    let alpha_upper = p - 1.0;
    let beta_upper = alpha * nn / (nn - mp);
    Ok(SobolevExponent {
        n,
        p,
        alpha,
        beta,
        m,
        p_star,
        alpha_lower,
        alpha_upper,
        beta_upper,
        alpha_window: alpha_lower < alpha && alpha < alpha_upper,
        beta_window: -1.0 < beta && beta <= beta_upper,
        p_below_p_star: p < p_star,
    })
}
