//! Safeguarded root search for functions that are strictly increasing on an
//! open bracket whose endpoints may be poles.
//!
//! The search bisects until the bracket has shrunk to a fixed fraction of its
//! initial width, then switches to Newton steps. Any Newton step that leaves
//! the current bracket or fails to halve the previous step falls back to
//! bisection, so the method is deterministic and always converges for
//! monotone input.

use crate::error::{Result, SebaError};

/// Stopping rule for [`solve_increasing`].
#[derive(Debug, Clone, Copy)]
pub struct RootTolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: usize,
}

impl Default for RootTolerance {
    fn default() -> Self {
        Self {
            rel: 1e-12,
            abs: 1e-300,
            max_iter: 400,
        }
    }
}

impl RootTolerance {
    fn width(&self, x: f64) -> f64 {
        self.abs + self.rel * x.abs().max(1.0)
    }
}

/// Fraction of the initial bracket at which Newton polishing starts.
const BISECTION_FRACTION: f64 = 1e-3;

/// Finds `x` in `(lo, hi)` with `f(x) = target`.
///
/// `f` returns the value and the derivative. The caller guarantees
/// `f(x) - target < 0` near `lo` and `> 0` near `hi`; the endpoints are never
/// evaluated.
pub fn solve_increasing<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    target: f64,
    tol: RootTolerance,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(SebaError::NoConvergence {
            lo,
            hi,
            iterations: 0,
        });
    }
    let (mut a, mut b) = (lo, hi);
    let switch_width = BISECTION_FRACTION * (hi - lo);
    let mut iterations = 0;

    while b - a > switch_width {
        iterations += 1;
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(m);
        }
        let (v, _) = f(m);
        if v == target {
            return Ok(m);
        }
        if v < target {
            a = m;
        } else {
            b = m;
        }
        if b - a <= tol.width(m) {
            return Ok(0.5 * (a + b));
        }
    }

    let mut x = 0.5 * (a + b);
    let mut last_step = b - a;
    while iterations < tol.max_iter {
        iterations += 1;
        let (v, dv) = f(x);
        let resid = v - target;
        if resid == 0.0 {
            return Ok(x);
        }
        if resid < 0.0 {
            a = x;
        } else {
            b = x;
        }
        if b - a <= tol.width(x) {
            return Ok(0.5 * (a + b));
        }
        let newton = if dv > 0.0 && dv.is_finite() {
            x - resid / dv
        } else {
            f64::NAN
        };
        let step = (newton - x).abs();
        let next = if newton > a && newton < b && step <= 0.5 * last_step {
            last_step = step;
            newton
        } else {
            last_step = b - a;
            0.5 * (a + b)
        };
        if (next - x).abs() <= tol.width(next) {
            return Ok(next);
        }
        x = next;
    }
    Err(SebaError::NoConvergence {
        lo: a,
        hi: b,
        iterations,
    })
}
