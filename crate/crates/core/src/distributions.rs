//! Gamma density over the precision `p`, the induced density over the
//! standard deviation `s = 1/√p`, and their moments.
//!
//! With `p ~ Gamma(a, b)` (shape `a`, rate `b`) the change of variables
//! `p = 1/s²`, `|dp/ds| = 2/s³` gives
//!
//! ```text
//! f_s(s | a, b) = 2 b^a / Γ(a) · s^(-2a-1) · exp(-b / s²),   s > 0
//! ```
//!
//! whose mean and variance exist for `a > 1`:
//!
//! ```text
//! μ_s  = √b · Γ(a - ½) / Γ(a)
//! σ_s² = b · [1/(a - 1) - Γ(a - ½)² / Γ(a)²]
//! ```
//!
//! Everything is evaluated through `ln Γ` so that large shapes do not overflow.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::special::log_gamma_unchecked;

/// Shape/rate pair of a Gamma distribution over the precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaParams {
    a: f64,
    b: f64,
}

impl GammaParams {
    /// Fails unless both `a` and `b` are finite and strictly positive.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(domain(format!("shape a must be finite and > 0, got {a}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(domain(format!("rate b must be finite and > 0, got {b}")));
        }
        Ok(Self { a, b })
    }

    /// Shape.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Rate.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// ln(b^a / Γ(a)), shared by both densities.
    fn log_norm(&self) -> f64 {
        self.a * self.b.ln() - log_gamma_unchecked(self.a)
    }
}

/// Mean and standard deviation of the distribution over `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdSummary {
    mu: f64,
    sigma: f64,
}

impl SdSummary {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(domain(format!("mu must be finite and > 0, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain(format!("sigma must be finite and > 0, got {sigma}")));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Coefficient of variation σ/μ.
    pub fn cv(&self) -> f64 {
        self.sigma / self.mu
    }
}

/// Gamma density over the precision; zero outside `p > 0`.
pub fn precision_pdf(p: f64, params: &GammaParams) -> f64 {
    if !(p > 0.0) {
        return 0.0;
    }
    let a = params.a;
    (params.log_norm() + (a - 1.0) * p.ln() - p * params.b).exp()
}

/// Mean `a/b` and variance `a/b²` of the precision.
pub fn precision_moments(params: &GammaParams) -> (f64, f64) {
    let GammaParams { a, b } = *params;
    (a / b, a / (b * b))
}

/// Density over the standard deviation `s = 1/√p`; zero outside `s > 0`.
pub fn sd_pdf(s: f64, params: &GammaParams) -> f64 {
    if !(s > 0.0) {
        return 0.0;
    }
    let a = params.a;
    let log_density =
        std::f64::consts::LN_2 + params.log_norm() - (2.0 * a + 1.0) * s.ln() - params.b / (s * s);
    log_density.exp()
}

/// Mean and standard deviation of `s`; defined only for `a > 1`.
pub fn sd_moments(params: &GammaParams) -> Result<SdSummary> {
    let GammaParams { a, b } = *params;
    if !(a > 1.0) {
        return Err(domain(format!(
            "SD moments undefined: shape a must be > 1, got {a}"
        )));
    }
    let log_ratio = log_gamma_unchecked(a - 0.5) - log_gamma_unchecked(a);
    let mu = b.sqrt() * log_ratio.exp();
    let variance = b * (1.0 / (a - 1.0) - (2.0 * log_ratio).exp());
    if !(variance > 0.0) || !variance.is_finite() || !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Degenerate(format!(
            "SD moments lost precision at a = {a}, b = {b} (mu = {mu}, variance = {variance})"
        )));
    }
    SdSummary::new(mu, variance.sqrt())
}
