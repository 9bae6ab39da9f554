//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p gammasd-core --test acceptance -- --nocapture` to see them.
//! The full 1000 × 1000 sweep is `#[ignore]`d; add `--ignored` to include it.

use std::f64::consts::PI;

use gammasd_core::{
    fit_prior, integrate, log_gamma, precision_moments, precision_pdf, residual, run_grid,
    run_grid_with, sd_moments, sd_pdf, shape_upper_bound, summarize, write_csv, CellResult,
    CutoffRegion, Execution, GammaParams, GridSpec, OptimOptions, SdSummary, LOWER_SHAPE_OFFSET,
};

fn verdict(id: &str, title: &str, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {id} {title}: {detail}");
    assert!(ok, "{id} {title}: {detail}");
}

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn params(a: f64, b: f64) -> GammaParams {
    GammaParams::new(a, b).unwrap()
}

fn cutoff_check(spec: &GridSpec) -> (usize, usize, Vec<CellResult>) {
    let cells = run_grid(spec).unwrap();
    let summary = summarize(&cells, &CutoffRegion::default()).unwrap();
    let failures: Vec<CellResult> = cells
        .iter()
        .filter(|c| CutoffRegion::default().contains(c.mu, c.sigma) && !c.passed)
        .take(5)
        .copied()
        .collect();
    (summary.cutoff_cells, summary.cutoff_failures, failures)
}

#[test]
fn ac1_cutoff_region_passes_on_reduced_grid() {
    let spec = GridSpec::with_resolution(200, 200);
    let (inside, failed, examples) = cutoff_check(&spec);
    verdict(
        "AC1",
        "cut-off region 2e-3<mu<1e4, 3e-3<sigma/mu<50 passes at 1% (200x200)",
        inside > 0 && failed == 0,
        format!("{inside} cells inside, {failed} failed {examples:?}"),
    );
}

#[test]
#[ignore = "full 1000x1000 sweep; opt in with --ignored"]
fn ac1_cutoff_region_passes_on_full_grid() {
    let (inside, failed, examples) = cutoff_check(&GridSpec::default());
    verdict(
        "AC1-full",
        "cut-off region passes at 1% (1000x1000)",
        inside > 0 && failed == 0,
        format!("{inside} cells inside, {failed} failed {examples:?}"),
    );
}

#[test]
fn ac2_figure_example_moments() {
    let p = params(2.0, 2.0);
    let m = sd_moments(&p).unwrap();
    let (mu_cf, sigma_cf) = ((PI / 2.0).sqrt(), (2.0 - PI / 2.0).sqrt());

    let mean = integrate(|s| s * sd_pdf(s, &p), 0.0, f64::INFINITY, 1e-13)
        .unwrap()
        .value;
    let second = integrate(|s| s * s * sd_pdf(s, &p), 0.0, f64::INFINITY, 1e-13)
        .unwrap()
        .value;
    let sigma_quad = (second - mean * mean).sqrt();

    let naive = 1.0 / precision_moments(&p).0.sqrt();
    let ok = rel(m.mu(), mu_cf) < 1e-12
        && rel(m.sigma(), sigma_cf) < 1e-12
        && (m.mu() - 1.253_314_137).abs() < 1e-9
        && (m.sigma() - 0.655_136_377).abs() < 1e-9
        && rel(m.mu(), mean) < 1e-8
        && rel(m.sigma(), sigma_quad) < 1e-8
        && naive == 1.0
        && (m.mu() - naive).abs() > 0.1;
    verdict(
        "AC2",
        "sd_moments(2,2) = (sqrt(pi/2), sqrt(2-pi/2)), quadrature agrees to 1e-8, mean != 1/sqrt(E[p])",
        ok,
        format!(
            "mu={:.12} sigma={:.12} quad=({mean:.12}, {sigma_quad:.12}) naive={naive}",
            m.mu(),
            m.sigma()
        ),
    );
}

#[test]
fn ac3_inverse_consistency() {
    let target = SdSummary::new(1.253_314_137, 0.655_136_377).unwrap();
    let fit = fit_prior(&target, &OptimOptions::default()).unwrap();
    let (a, b) = (fit.params.a(), fit.params.b());
    verdict(
        "AC3",
        "fit_prior(1.253314137, 0.655136377) = (2, 2) within 1e-6 rel, objective < 1e-12",
        fit.converged && rel(a, 2.0) < 1e-6 && rel(b, 2.0) < 1e-6 && fit.objective_at_min < 1e-12,
        format!("a0={a:.12} b0={b:.12} objective={:e}", fit.objective_at_min),
    );
}

/// Radical inverse of `index` in `base` (Halton sequence component).
fn halton(mut index: u64, base: u64) -> f64 {
    let (mut result, mut f) = (0.0, 1.0);
    while index > 0 {
        f /= base as f64;
        result += f * (index % base) as f64;
        index /= base;
    }
    result
}

fn bisect_root(target: &SdSummary, mut lo: f64, mut hi: f64) -> Option<f64> {
    let d = |a: f64| residual(a, target).unwrap();
    let mut d_lo = d(lo);
    let d_hi = d(hi);
    if d_lo == 0.0 {
        return Some(lo);
    }
    if d_hi == 0.0 {
        return Some(hi);
    }
    if d_lo.signum() == d_hi.signum() {
        return None;
    }
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        let d_mid = d(mid);
        if d_mid.signum() == d_lo.signum() {
            lo = mid;
            d_lo = d_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[test]
fn ac4_upper_bound_contains_root() {
    let region = CutoffRegion::default();
    let (lmu_lo, lmu_hi) = (region.mu_lo.ln(), region.mu_hi.ln());
    let (lr_lo, lr_hi) = (region.ratio_lo.ln(), region.ratio_hi.ln());
    let mut violations = Vec::new();
    for i in 1..=1000u64 {
        let mu = (lmu_lo + (lmu_hi - lmu_lo) * halton(i, 2)).exp();
        let ratio = (lr_lo + (lr_hi - lr_lo) * halton(i, 3)).exp();
        let target = SdSummary::new(mu, ratio * mu).unwrap();
        let upper = shape_upper_bound(&target);
        match bisect_root(&target, 1.0 + LOWER_SHAPE_OFFSET, upper) {
            Some(root) if root > 1.0 && root <= upper => {}
            other => violations.push((mu, ratio, upper, other)),
        }
    }
    verdict(
        "AC4",
        "bisection root of D lies in (1, a_hat] for 1000 Halton points in the cut-off region",
        violations.is_empty(),
        format!(
            "{} violations {:?}",
            violations.len(),
            violations.iter().take(5).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn ac5_normalisation_and_change_of_variables() {
    let mut worst_norm = 0.0f64;
    let mut worst_cdf = 0.0f64;
    for (a, b) in [(2.0, 2.0), (5.0, 1.0), (1.5, 10.0)] {
        let p = params(a, b);
        let total = integrate(|s| sd_pdf(s, &p), 0.0, f64::INFINITY, 1e-10)
            .unwrap()
            .value;
        worst_norm = worst_norm.max((total - 1.0).abs());
        for x in [0.1, 1.0, 10.0] {
            let f_p = integrate(|q| precision_pdf(q, &p), 0.0, x, 1e-11)
                .unwrap()
                .value;
            let f_s = integrate(|s| sd_pdf(s, &p), 0.0, 1.0 / x.sqrt(), 1e-11)
                .unwrap()
                .value;
            worst_cdf = worst_cdf.max((f_p - (1.0 - f_s)).abs());
        }
    }
    verdict(
        "AC5",
        "integral of f_s = 1 +- 1e-6 and F_p(x) = 1 - F_s(1/sqrt(x)) +- 1e-6",
        worst_norm < 1e-6 && worst_cdf < 1e-6,
        format!("max |norm - 1| = {worst_norm:e}, max CDF gap = {worst_cdf:e}"),
    );
}

#[test]
fn ac6_log_gamma_reference_values() {
    // ln Γ(100.5) = ln √π + Σ_{k=0}^{99} ln(k + ½), summed with compensation.
    let (mut sum, mut comp) = (0.5 * PI.ln(), 0.0f64);
    for k in 0..100 {
        let y = (f64::from(k) + 0.5).ln() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    // 361.43554046777762155525... (50-digit reference)
    let reference_100_5 = 361.435_540_467_777_6;
    let cases = [
        (1.0, 0.0),
        (1.5, -0.120_782_237_635_245),
        (2.0, 0.0),
        (10.0, 12.801_827_480_081_469),
        (100.5, reference_100_5),
    ];
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for (x, want) in cases {
        let got = log_gamma(x).unwrap();
        let err = if want == 0.0 {
            got.abs()
        } else {
            rel(got, want)
        };
        worst = worst.max(err);
        detail += &format!("lnG({x})={got:.15} ");
    }
    let oracle_gap = rel(sum, reference_100_5);
    verdict(
        "AC6",
        "log_gamma at {1, 1.5, 2, 10, 100.5} within 1e-12 relative",
        worst < 1e-12 && oracle_gap < 1e-13,
        format!("{detail}worst={worst:e} oracle gap={oracle_gap:e}"),
    );
}

fn csv_bytes(cells: &[CellResult]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(cells, &mut buf).unwrap();
    buf
}

#[test]
fn ac7_determinism_and_parallel_equivalence() {
    let spec = GridSpec::with_resolution(60, 60);
    let first = csv_bytes(&run_grid(&spec).unwrap());
    let second = csv_bytes(&run_grid(&spec).unwrap());
    let serial = csv_bytes(&run_grid_with(&spec, Execution::Serial).unwrap());
    verdict(
        "AC7",
        "repeated runs give byte-identical CSV; serial == parallel",
        first == second && first == serial,
        format!(
            "{} bytes, {} rows",
            first.len(),
            first.iter().filter(|&&b| b == b'\n').count()
        ),
    );
}
