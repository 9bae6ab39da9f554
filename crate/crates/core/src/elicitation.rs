//! Inverse transform: from a target (μ₀, σ₀) of the standard deviation to a
//! Gamma(a₀, b₀) prior on the precision.
//!
//! Writing `S(a) = Γ(a - ½)² / Γ(a)²`, the moment equations become
//! `μ₀² = b S(a)` and `σ₀² = b [1/(a - 1) - S(a)]`. Eliminating `b` leaves
//!
//! ```text
//! D(a) = μ₀² / S(a) - σ₀² / (1/(a - 1) - S(a)) = 0
//! ```
//!
//! which is solved by minimising `ln(D(a)² + 1)` over `a ∈ (1, â₀]`, where
//! `â₀` is the closed-form root obtained with `S(a) ≈ 1/a + 3/(4a²)`. Finally
//! `b₀ = μ₀² / S(a₀)`.

use serde::Serialize;

use crate::distributions::{sd_moments, GammaParams, SdSummary};
use crate::error::{domain, Error, Result};
use crate::optimize::{minimize_bounded, OptimOptions};
use crate::special::log_gamma_unchecked;

/// Offset above `a = 1`, where `D` is singular, for the lower end of the search.
pub const LOWER_SHAPE_OFFSET: f64 = 1e-9;

/// Relative round-trip error below which a fit counts as successful.
pub const PASS_THRESHOLD: f64 = 1e-2;

fn require_shape_above_one(a: f64) -> Result<()> {
    if a > 1.0 && a.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("shape a must be finite and > 1, got {a}")))
    }
}

/// `S(a) = exp(2 ln Γ(a - ½) - 2 ln Γ(a))` for `a > 1`.
pub fn squared_gamma_ratio(a: f64) -> Result<f64> {
    require_shape_above_one(a)?;
    Ok(squared_gamma_ratio_unchecked(a))
}

fn squared_gamma_ratio_unchecked(a: f64) -> f64 {
    (2.0 * log_gamma_unchecked(a - 0.5) - 2.0 * log_gamma_unchecked(a)).exp()
}

/// Two-term large-`a` expansion of `S`: `1/a + 3/(4a²)`.
pub fn squared_gamma_ratio_approx(a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(domain(format!("shape a must be finite and > 0, got {a}")));
    }
    Ok(1.0 / a + 3.0 / (4.0 * a * a))
}

/// `D(a)`; zero exactly when (a, μ₀²/S(a)) reproduces the target.
pub fn residual(a: f64, target: &SdSummary) -> Result<f64> {
    require_shape_above_one(a)?;
    let s = squared_gamma_ratio_unchecked(a);
    let variance_factor = 1.0 / (a - 1.0) - s;
    if !(variance_factor > 0.0) || !variance_factor.is_finite() {
        return Err(Error::Degenerate(format!(
            "1/(a-1) - S(a) = {variance_factor} at a = {a}; shape too large for double precision"
        )));
    }
    let (mu0, sigma0) = (target.mu(), target.sigma());
    Ok(mu0 * mu0 / s - sigma0 * sigma0 / variance_factor)
}

/// Minimisation target `ln(D(a)² + 1)`.
pub fn objective(a: f64, target: &SdSummary) -> Result<f64> {
    let d = residual(a, target)?;
    // ln_1p keeps D² < 1e-16 distinguishable from zero.
    Ok((d * d).ln_1p())
}

/// Upper end `â₀` of the search bracket; depends only on μ₀/σ₀ and tends to
/// 1 as μ₀/σ₀ → 0.
pub fn shape_upper_bound(target: &SdSummary) -> f64 {
    let r = target.mu() / target.sigma();
    let r2 = r * r;
    (1.0 + (49.0 + r2 * r2 + 50.0 * r2).sqrt() + r2) / 8.0
}

/// Recovered prior together with diagnostics of the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    /// The recovered (a₀, b₀).
    pub params: GammaParams,
    pub objective_at_min: f64,
    pub residual_d: f64,
    /// `sd_moments(params)`.
    pub round_trip: SdSummary,
    /// |μ' − μ₀|/μ₀ and |σ' − σ₀|/σ₀.
    pub round_trip_rel_err: (f64, f64),
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Minimiser within `2·x_tol` of either end of the bracket.
    pub at_bracket_edge: bool,
    pub optimizer_converged: bool,
    /// Optimiser converged and both relative errors are below [`PASS_THRESHOLD`].
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn max_rel_err(&self) -> f64 {
        self.round_trip_rel_err.0.max(self.round_trip_rel_err.1)
    }
}

/// Fits (a₀, b₀) so that the induced SD distribution has mean μ₀ and standard
/// deviation σ₀.
///
/// Optimiser non-convergence is reported through `converged = false` rather
/// than an error. Errors are returned for an empty bracket or when the
/// recovered parameters cannot be evaluated in double precision.
pub fn fit_prior(target: &SdSummary, opts: &OptimOptions) -> Result<FitResult> {
    let lower = 1.0 + LOWER_SHAPE_OFFSET;
    let upper = shape_upper_bound(target);
    if !(upper > lower) {
        return Err(Error::InfeasibleBracket { lower, upper });
    }

    let opt = minimize_bounded(
        |a| objective(a, target).unwrap_or(f64::INFINITY),
        lower,
        upper,
        opts,
    )?;
    let a0 = opt.x_min;
    let s = squared_gamma_ratio_unchecked(a0);
    let b0 = target.mu() * target.mu() / s;
    let params = GammaParams::new(a0, b0).map_err(|_| {
        Error::Degenerate(format!(
            "recovered rate b0 = {b0} is not usable (a0 = {a0})"
        ))
    })?;

    let round_trip = sd_moments(&params)?;
    let rel_mu = (round_trip.mu() - target.mu()).abs() / target.mu();
    let rel_sigma = (round_trip.sigma() - target.sigma()).abs() / target.sigma();

    let at_bracket_edge =
        (a0 - lower).abs() < 2.0 * opts.x_tol || (upper - a0).abs() < 2.0 * opts.x_tol;
    let converged = opt.converged && rel_mu < PASS_THRESHOLD && rel_sigma < PASS_THRESHOLD;

    Ok(FitResult {
        params,
        objective_at_min: opt.f_min,
        residual_d: residual(a0, target).unwrap_or(f64::NAN),
        round_trip,
        round_trip_rel_err: (rel_mu, rel_sigma),
        lower_bound: lower,
        upper_bound: upper,
        at_bracket_edge,
        optimizer_converged: opt.converged,
        converged,
        iterations: opt.iterations,
    })
}
