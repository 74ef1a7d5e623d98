//! Derivative-free scalar solvers: bracketing bisection and golden-section search.

use crate::error::{Error, Result};

/// Root of a continuous `f` with a sign change on `[lo, hi]`, to absolute width `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NoSolution(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scans `steps` equal cells of `[lo, hi]` for the first sign change of `f`
/// and refines it by bisection. `None` when no cell changes sign.
pub fn first_crossing<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    steps: usize,
    tol: f64,
) -> Option<f64> {
    let h = (hi - lo) / steps as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=steps {
        let x1 = if i == steps { hi } else { lo + h * i as f64 };
        let f1 = f(x1);
        if f0 == 0.0 {
            return Some(x0);
        }
        if f0.signum() != f1.signum() && f0.is_finite() && f1.is_finite() {
            return bisect(&f, x0, x1, tol).ok();
        }
        x0 = x1;
        f0 = f1;
    }
    None
}

/// Maximizer of a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}
