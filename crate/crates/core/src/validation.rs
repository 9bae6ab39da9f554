//! Round-trip validation over a log-spaced grid of (μ, σ/μ).
//!
//! Every cell maps (μ, σ) to (a₀, b₀) with [`fit_prior`], maps back with
//! [`sd_moments`](crate::sd_moments), and passes when both relative errors are
//! below the threshold and the optimiser converged. Cells are independent and
//! may be evaluated in parallel; the output order is always row-major in
//! (μ index, σ index).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::SdSummary;
use crate::elicitation::{fit_prior, PASS_THRESHOLD};
use crate::error::{domain, Result};
use crate::optimize::OptimOptions;

/// Header row of the CSV written by [`write_csv`].
pub const CSV_HEADER: &str =
    "mu,sigma,a0,b0,mu_rt,sigma_rt,rel_err_mu,rel_err_sigma,converged,passed";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub mu_points: usize,
    pub sigma_points: usize,
    pub mu_lo: f64,
    pub mu_hi: f64,
    /// σ/μ range swept for every μ.
    pub sigma_ratio_lo: f64,
    pub sigma_ratio_hi: f64,
    pub pass_threshold: f64,
    pub optim: OptimOptions,
}

impl Default for GridSpec {
    /// 1000 × 1000 cells, μ ∈ [1e-4, 1e4], σ/μ ∈ [1e-4, 1e2], 1 % threshold.
    fn default() -> Self {
        Self {
            mu_points: 1000,
            sigma_points: 1000,
            mu_lo: 1e-4,
            mu_hi: 1e4,
            sigma_ratio_lo: 1e-4,
            sigma_ratio_hi: 1e2,
            pass_threshold: PASS_THRESHOLD,
            optim: OptimOptions::default(),
        }
    }
}

impl GridSpec {
    /// Default ranges at a different resolution.
    pub fn with_resolution(mu_points: usize, sigma_points: usize) -> Self {
        Self {
            mu_points,
            sigma_points,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu_points < 1 || self.sigma_points < 1 {
            return Err(domain("grid needs at least one point per axis"));
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.mu_lo) || !positive(self.mu_hi) || !(self.mu_hi > self.mu_lo) {
            return Err(domain(format!(
                "invalid mu range [{}, {}]",
                self.mu_lo, self.mu_hi
            )));
        }
        if !positive(self.sigma_ratio_lo)
            || !positive(self.sigma_ratio_hi)
            || !(self.sigma_ratio_hi > self.sigma_ratio_lo)
        {
            return Err(domain(format!(
                "invalid sigma/mu range [{}, {}]",
                self.sigma_ratio_lo, self.sigma_ratio_hi
            )));
        }
        if !positive(self.pass_threshold) {
            return Err(domain(format!(
                "pass threshold must be > 0, got {}",
                self.pass_threshold
            )));
        }
        self.optim.validate()
    }

    /// Log-spaced μ values, both endpoints included.
    pub fn mu_values(&self) -> Vec<f64> {
        log_space(self.mu_lo, self.mu_hi, self.mu_points)
    }

    /// Log-spaced σ/μ values, both endpoints included.
    pub fn sigma_ratios(&self) -> Vec<f64> {
        log_space(self.sigma_ratio_lo, self.sigma_ratio_hi, self.sigma_points)
    }
}

pub(crate) fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (ln_lo + step * i as f64).exp(),
        })
        .collect()
}

/// Outcome of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellResult {
    pub mu: f64,
    pub sigma: f64,
    pub a0: f64,
    pub b0: f64,
    pub mu_rt: f64,
    pub sigma_rt: f64,
    pub rel_err_mu: f64,
    pub rel_err_sigma: f64,
    /// Optimiser convergence; `false` also for cells whose fit errored.
    pub converged: bool,
    pub passed: bool,
}

impl CellResult {
    pub fn sigma_ratio(&self) -> f64 {
        self.sigma / self.mu
    }

    fn failed(mu: f64, sigma: f64) -> Self {
        Self {
            mu,
            sigma,
            a0: f64::NAN,
            b0: f64::NAN,
            mu_rt: f64::NAN,
            sigma_rt: f64::NAN,
            rel_err_mu: f64::NAN,
            rel_err_sigma: f64::NAN,
            converged: false,
            passed: false,
        }
    }
}

/// Fits and back-transforms a single (μ, σ) pair.
pub fn evaluate_cell(mu: f64, sigma: f64, threshold: f64, opts: &OptimOptions) -> CellResult {
    let fit = match SdSummary::new(mu, sigma).and_then(|t| fit_prior(&t, opts)) {
        Ok(fit) => fit,
        Err(_) => return CellResult::failed(mu, sigma),
    };
    let (rel_err_mu, rel_err_sigma) = fit.round_trip_rel_err;
    let converged = fit.optimizer_converged;
    CellResult {
        mu,
        sigma,
        a0: fit.params.a(),
        b0: fit.params.b(),
        mu_rt: fit.round_trip.mu(),
        sigma_rt: fit.round_trip.sigma(),
        rel_err_mu,
        rel_err_sigma,
        converged,
        passed: converged && rel_err_mu < threshold && rel_err_sigma < threshold,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Runs the sweep on all available cores.
pub fn run_grid(spec: &GridSpec) -> Result<Vec<CellResult>> {
    run_grid_with(spec, Execution::Parallel)
}

pub fn run_grid_with(spec: &GridSpec, execution: Execution) -> Result<Vec<CellResult>> {
    spec.validate()?;
    let mus = spec.mu_values();
    let ratios = spec.sigma_ratios();
    let cols = ratios.len();
    let cell = |idx: usize| {
        let mu = mus[idx / cols];
        let sigma = ratios[idx % cols] * mu;
        evaluate_cell(mu, sigma, spec.pass_threshold, &spec.optim)
    };
    let n = mus.len() * cols;
    Ok(match execution {
        Execution::Serial => (0..n).map(cell).collect(),
        Execution::Parallel => (0..n).into_par_iter().map(cell).collect(),
    })
}

/// Rectangle in (μ, σ/μ) space; bounds are inclusive for [`PassRectangle`]
/// and exclusive for [`CutoffRegion::contains`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffRegion {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
}

impl Default for CutoffRegion {
    /// 2e-3 < μ < 1e4 and 3e-3 < σ/μ < 50.
    fn default() -> Self {
        Self {
            mu_lo: 2e-3,
            mu_hi: 1e4,
            ratio_lo: 3e-3,
            ratio_hi: 50.0,
        }
    }
}

impl CutoffRegion {
    pub fn contains(&self, mu: f64, sigma: f64) -> bool {
        let ratio = sigma / mu;
        self.mu_lo < mu && mu < self.mu_hi && self.ratio_lo < ratio && ratio < self.ratio_hi
    }
}

/// Largest block of grid cells (by cell count) in which every cell passed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassRectangle {
    pub mu_min: f64,
    pub mu_max: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub rows: usize,
    pub cols: usize,
    /// Whether every grid cell strictly inside the cut-off region lies in this block.
    pub encloses_cutoff: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSummary {
    pub total: usize,
    pub passed: usize,
    pub not_converged: usize,
    pub pass_fraction: f64,
    pub cutoff: CutoffRegion,
    pub cutoff_cells: usize,
    pub cutoff_failures: usize,
    /// `None` if the results do not form a rectangular row-major grid.
    pub pass_rectangle: Option<PassRectangle>,
}

impl GridSummary {
    /// True when every cell inside the cut-off region passed.
    pub fn cutoff_passes(&self) -> bool {
        self.cutoff_failures == 0
    }
}

/// Pass statistics, cut-off check and largest fully passing block.
pub fn summarize(results: &[CellResult], cutoff: &CutoffRegion) -> Result<GridSummary> {
    if results.is_empty() {
        return Err(domain("cannot summarise an empty result set"));
    }
    let total = results.len();
    let passed = results.iter().filter(|c| c.passed).count();
    let not_converged = results.iter().filter(|c| !c.converged).count();
    let inside: Vec<&CellResult> = results
        .iter()
        .filter(|c| cutoff.contains(c.mu, c.sigma))
        .collect();
    let cutoff_failures = inside.iter().filter(|c| !c.passed).count();

    Ok(GridSummary {
        total,
        passed,
        not_converged,
        pass_fraction: passed as f64 / total as f64,
        cutoff: *cutoff,
        cutoff_cells: inside.len(),
        cutoff_failures,
        pass_rectangle: grid_shape(results)
            .and_then(|cols| largest_pass_rectangle(results, cols, cutoff)),
    })
}

/// Number of columns if `results` is a row-major grid with constant μ per row.
fn grid_shape(results: &[CellResult]) -> Option<usize> {
    let first_mu = results[0].mu.to_bits();
    let cols = results
        .iter()
        .take_while(|c| c.mu.to_bits() == first_mu)
        .count();
    if results.len() % cols != 0 {
        return None;
    }
    let regular = results
        .chunks(cols)
        .all(|row| row.iter().all(|c| c.mu.to_bits() == row[0].mu.to_bits()));
    regular.then_some(cols)
}

fn largest_pass_rectangle(
    results: &[CellResult],
    cols: usize,
    cutoff: &CutoffRegion,
) -> Option<PassRectangle> {
    // Maximal all-pass rectangle via the histogram/stack method.
    let mut heights = vec![0usize; cols];
    // (area, top row, bottom row, left col, right col)
    let mut best: Option<(usize, usize, usize, usize, usize)> = None;
    for (row_idx, row) in results.chunks(cols).enumerate() {
        for (h, cell) in heights.iter_mut().zip(row) {
            *h = if cell.passed { *h + 1 } else { 0 };
        }
        let mut stack: Vec<usize> = Vec::with_capacity(cols);
        for j in 0..=cols {
            let h = if j < cols { heights[j] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] < h {
                    break;
                }
                stack.pop();
                let height = heights[top];
                let left = stack.last().map_or(0, |&l| l + 1);
                let area = height * (j - left);
                if height > 0 && best.map_or(true, |b| area > b.0) {
                    best = Some((area, row_idx + 1 - height, row_idx, left, j - 1));
                }
            }
            stack.push(j);
        }
    }

    let (_, top, bottom, left, right) = best?;
    let at = |r: usize, c: usize| &results[r * cols + c];
    let encloses_cutoff = results.iter().enumerate().all(|(idx, c)| {
        let (r, col) = (idx / cols, idx % cols);
        !cutoff.contains(c.mu, c.sigma)
            || (top..=bottom).contains(&r) && (left..=right).contains(&col)
    });
    Some(PassRectangle {
        mu_min: at(top, left).mu,
        mu_max: at(bottom, left).mu,
        ratio_min: at(top, left).sigma_ratio(),
        ratio_max: at(top, right).sigma_ratio(),
        rows: bottom - top + 1,
        cols: right - left + 1,
        encloses_cutoff,
    })
}

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `results` as CSV: [`CSV_HEADER`], then one row per cell in input
/// order. Reals carry 17 significant digits.
pub fn write_csv<W: Write>(results: &[CellResult], out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{CSV_HEADER}")?;
    for c in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            sig17(c.mu),
            sig17(c.sigma),
            sig17(c.a0),
            sig17(c.b0),
            sig17(c.mu_rt),
            sig17(c.sigma_rt),
            sig17(c.rel_err_mu),
            sig17(c.rel_err_sigma),
            c.converged,
            c.passed,
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv_file(results: &[CellResult], path: impl AsRef<Path>) -> Result<()> {
    write_csv(results, File::create(path)?)
}
