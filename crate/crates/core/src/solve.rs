//! Bracketed root finding and one-dimensional maximisation.

use crate::error::{Error, Result};

pub(crate) const MAX_ITER: usize = 200;

/// Root of an increasing function inside `[lo, hi]`, given `f(lo) < 0 < f(hi)`.
///
/// The bracket is bisected down to `switch_width` and then refined with
/// safeguarded Newton steps; any step leaving the bracket falls back to
/// bisection. Stops when `|f| <= residual_tol` or the bracket collapses.
pub(crate) fn increasing_root<F>(
    op: &'static str,
    f: F,
    mut lo: f64,
    mut hi: f64,
    switch_width: f64,
    residual_tol: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let mut x = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, x);
    for it in 0..MAX_ITER {
        let (fx, dfx) = f(x)?;
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
        if fx.abs() <= residual_tol {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let bisect = 0.5 * (lo + hi);
        let next = if hi - lo > switch_width || !(dfx > 0.0) {
            bisect
        } else {
            let newton = x - fx / dfx;
            if newton > lo && newton < hi {
                newton
            } else {
                bisect
            }
        };
        if next == x || !(lo < hi) || (hi - lo) <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            // bracket exhausted at floating resolution
            let (fb, _) = f(next)?;
            if fb.abs() < best.0 {
                best = (fb.abs(), next);
            }
            if best.0 <= residual_tol * 16.0 {
                return Ok(best.1);
            }
            return Err(Error::NoConvergence {
                op,
                iterations: it + 1,
                residual: best.0,
            });
        }
        x = next;
    }
    Err(Error::NoConvergence {
        op,
        iterations: MAX_ITER,
        residual: best.0,
    })
}

/// Golden-section search for the maximiser of a unimodal `f` on `[lo, hi]`.
/// Only interior points are evaluated.
pub(crate) fn golden_max<F>(f: F, mut lo: f64, mut hi: f64, width: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut it = 0;
    while hi - lo > width && it < MAX_ITER {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
        it += 1;
    }
    Ok(if f1 > f2 { x1 } else { x2 })
}
