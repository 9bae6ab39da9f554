//! Bidirectional conversion between a Gamma(a, b) prior over a noise precision
//! `p` and the mean/standard deviation (μ, σ) of the induced distribution over
//! the noise standard deviation `s = 1/√p`.
//!
//! * [`distributions`] evaluates both densities and maps (a, b) to (μ, σ).
//! * [`elicitation`] inverts that map by bounded scalar minimisation.
//! * [`validation`] sweeps a log-spaced (μ, σ/μ) grid and checks round trips.
//!
//! ```
//! use gammasd_core::{fit_prior, sd_moments, GammaParams, OptimOptions};
//!
//! let params = GammaParams::new(2.0, 2.0).unwrap();
//! let summary = sd_moments(&params).unwrap();
//! assert!((summary.mu() - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
//!
//! let fit = fit_prior(&summary, &OptimOptions::default()).unwrap();
//! assert!(fit.converged);
//! assert!((fit.params.a() - 2.0).abs() < 1e-6);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too; tabulated
// coefficients are kept exactly as published.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod distributions;
pub mod elicitation;
pub mod error;
pub mod optimize;
pub mod special;
pub mod validation;

pub use distributions::{
    precision_moments, precision_pdf, sd_moments, sd_pdf, GammaParams, SdSummary,
};
pub use elicitation::{
    fit_prior, objective, residual, shape_upper_bound, squared_gamma_ratio,
    squared_gamma_ratio_approx, FitResult, LOWER_SHAPE_OFFSET, PASS_THRESHOLD,
};
pub use error::{Error, Result};
pub use optimize::{minimize_bounded, OptimOptions, OptimResult};
pub use special::{integrate, log_gamma, QuadratureResult};
pub use validation::{
    evaluate_cell, run_grid, run_grid_with, summarize, write_csv, write_csv_file, CellResult,
    CutoffRegion, Execution, GridSpec, GridSummary, PassRectangle, CSV_HEADER,
};
