//! Bounded scalar minimisation (Brent: golden section + parabolic steps).

use serde::Serialize;

use crate::error::{domain, Result};

/// Settings for [`minimize_bounded`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimOptions {
    /// Absolute tolerance on the minimiser.
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-10,
            max_iter: 500,
        }
    }
}

impl OptimOptions {
    pub fn new(x_tol: f64, max_iter: usize) -> Result<Self> {
        let opts = Self { x_tol, max_iter };
        opts.validate()?;
        Ok(opts)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_tol > 0.0 && self.x_tol.is_finite()) {
            return Err(domain(format!(
                "x_tol must be finite and > 0, got {}",
                self.x_tol
            )));
        }
        if self.max_iter < 1 {
            return Err(domain("max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimResult {
    pub x_min: f64,
    pub f_min: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// (3 - √5) / 2
const GOLDEN: f64 = 0.381_966_011_250_105_1;

// Relative part of the step tolerance. Kept at a few ulps so that `x_tol`
// is honoured for minimisers away from zero.
const REL_TOL: f64 = 2.0 * f64::EPSILON;

/// Minimises `f` on `[lo, hi]` without derivatives.
///
/// For a unimodal `f` with an interior minimiser the returned point is within
/// `x_tol` of it; otherwise a local minimiser is returned. `f` is never
/// evaluated at the endpoints. Non-finite values of `f` are treated as `+∞`.
/// Hitting `max_iter` returns the best point with `converged = false`.
pub fn minimize_bounded<F>(f: F, lo: f64, hi: f64, opts: &OptimOptions) -> Result<OptimResult>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(domain(format!(
            "minimize_bounded requires finite lo < hi, got [{lo}, {hi}]"
        )));
    }
    opts.validate()?;

    let eval = |x: f64| {
        let y = f(x);
        if y.is_nan() {
            f64::INFINITY
        } else {
            y
        }
    };

    let (mut a, mut b) = (lo, hi);
    // x: best so far, w: second best, v: previous value of w.
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(x);
    let (mut fw, mut fv) = (fx, fx);
    // d: last step, e: step before that.
    let mut d = 0.0f64;
    let mut e = 0.0f64;

    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = REL_TOL * x.abs() + opts.x_tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut use_golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            // Accept the parabola only if it lands inside the bracket and
            // moves less than half the step before last.
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }

        let step = if d.abs() >= tol1 {
            d
        } else if d >= 0.0 {
            tol1
        } else {
            -tol1
        };
        let u = x + step;
        let fu = eval(u);

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    if !converged {
        let xm = 0.5 * (a + b);
        let tol1 = REL_TOL * x.abs() + opts.x_tol / 3.0;
        converged = (x - xm).abs() <= 2.0 * tol1 - 0.5 * (b - a);
    }

    Ok(OptimResult {
        x_min: x.clamp(lo, hi),
        f_min: fx,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts(x_tol: f64) -> OptimOptions {
        OptimOptions::new(x_tol, 500).unwrap()
    }

    #[test]
    fn quadratic_vertex() {
        let r = minimize_bounded(|x| (x - 2.0).powi(2), 0.0, 5.0, &opts(1e-10)).unwrap();
        assert!(r.converged);
        assert!((r.x_min - 2.0).abs() <= 1e-10, "{r:?}");
        assert_eq!(r.f_min, (r.x_min - 2.0).powi(2));
    }

    #[test]
    fn kink_minimum() {
        let r = minimize_bounded(|x: f64| (x - 1.3).abs(), 0.0, 2.0, &opts(1e-8)).unwrap();
        assert!(r.converged);
        assert!((r.x_min - 1.3).abs() <= 1e-8, "{r:?}");
    }

    #[test]
    fn minimiser_far_from_origin() {
        let r = minimize_bounded(|x| (x - 54_321.5).powi(2), 1.0, 1e5, &opts(1e-10)).unwrap();
        assert!((r.x_min - 54_321.5).abs() <= 1e-10, "{r:?}");
    }

    #[test]
    fn boundary_minimum_stays_in_bracket() {
        let r = minimize_bounded(|x| x, 1.0, 3.0, &opts(1e-10)).unwrap();
        assert!(r.x_min >= 1.0 && r.x_min <= 3.0);
        assert!(r.x_min - 1.0 < 1e-9);
    }

    #[test]
    fn non_finite_values_are_avoided() {
        let f = |x: f64| if x > 2.5 { f64::NAN } else { (x - 1.0).powi(2) };
        let r = minimize_bounded(f, 0.0, 4.0, &opts(1e-10)).unwrap();
        assert!((r.x_min - 1.0).abs() <= 1e-10, "{r:?}");
    }

    #[test]
    fn iteration_limit_reports_non_convergence() {
        let r = minimize_bounded(
            |x| (x - 2.0).powi(2),
            0.0,
            5.0,
            &OptimOptions::new(1e-12, 3).unwrap(),
        )
        .unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
        assert!(r.x_min >= 0.0 && r.x_min <= 5.0);
    }

    #[test]
    fn invalid_bracket_and_options() {
        assert!(minimize_bounded(|x| x, 2.0, 2.0, &OptimOptions::default()).is_err());
        assert!(minimize_bounded(|x| x, 3.0, 2.0, &OptimOptions::default()).is_err());
        assert!(OptimOptions::new(0.0, 10).is_err());
        assert!(OptimOptions::new(1e-8, 0).is_err());
    }

    #[test]
    fn tighter_tolerance_is_not_worse() {
        let f = |x: f64| (x - 0.7).powi(2) + 3.0;
        let mut tol = 1e-3;
        let original = tol;
        for _ in 0..10 {
            tol *= 0.5;
            let err = (minimize_bounded(f, 0.0, 5.0, &opts(tol)).unwrap().x_min - 0.7).abs();
            assert!(err <= original);
        }
    }

    proptest! {
        #[test]
        fn unimodal_minimum_inside_bracket(
            centre in -50.0f64..50.0,
            width in 0.1f64..20.0,
            offset in 0.05f64..0.95,
            curvature in 0.01f64..100.0,
            quartic in proptest::bool::ANY,
        ) {
            let lo = centre - offset * width;
            let hi = lo + width;
            let f = |x: f64| {
                let d = x - centre;
                if quartic { curvature * d.powi(4) + d * d } else { curvature * d * d }
            };
            let r = minimize_bounded(f, lo, hi, &opts(1e-9)).unwrap();
            prop_assert!(r.converged);
            prop_assert!(r.x_min >= lo && r.x_min <= hi);
            prop_assert!(r.f_min <= f(lo) && r.f_min <= f(hi));
            prop_assert!((r.x_min - centre).abs() <= 1e-9, "x_min {} centre {}", r.x_min, centre);
        }
    }
}
