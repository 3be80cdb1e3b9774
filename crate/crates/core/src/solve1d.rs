//! Scalar bisection and golden-section search.

use crate::error::{CoreError, Result};

/// Bisects a sign change of `f` on `[a, b]` down to interval width `xtol`.
///
/// `fa` may pass a precomputed `f(a)`. Fails if the endpoints do not bracket.
pub fn bisect_root(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: Option<f64>,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut lo = a;
    let mut hi = b;
    let mut flo = fa.unwrap_or_else(|| f(lo));
    if flo == 0.0 {
        return Ok(lo);
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(CoreError::domain(format!(
            "bisection endpoints do not bracket a root: f({lo:.6e}) = {flo:.3e}, f({hi:.6e}) = {fhi:.3e}"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
/// Returns `(argmin, min)`. On non-unimodal input it still returns a local
/// minimizer of the sampled pattern.
pub fn golden_min(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if hi - lo <= xtol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Golden-section maximization; returns `(argmax, max)`.
pub fn golden_max(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let (x, neg) = golden_min(&mut |t| -f(t), a, b, xtol, max_iter);
    (x, -neg)
}
