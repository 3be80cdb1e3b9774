//! Monotone (Fritsch–Carlson) piecewise-cubic Hermite interpolation with
//! closed-form antiderivatives and closed-form extrema per segment.
//!
//! Used to represent user-sampled nonlinearities: the shape-preserving slope
//! limiter avoids the spurious overshoots of a plain cubic spline, which would
//! otherwise forge sign changes of f between samples and corrupt the
//! hypothesis probes. Integration and range maxima are evaluated exactly from
//! the cubic coefficients rather than by quadrature, so the derived primitive
//! F and envelope f* carry no tolerance of their own.

use crate::error::{CoreError, Result};

#[derive(Debug, Clone)]
pub(crate) struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Knot slopes after monotonicity limiting.
    m: Vec<f64>,
    /// iprefix[i] = integral of the interpolant over [x[0], x[i]].
    iprefix: Vec<f64>,
}

impl Pchip {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(CoreError::domain(
                "interpolation table needs at least two equal-length columns",
            ));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(CoreError::domain("interpolation table contains non-finite entries"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::domain(
                "interpolation abscissae must be strictly increasing",
            ));
        }
        let m = fritsch_carlson_slopes(x, y);
        let mut table = Pchip {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
            iprefix: Vec::new(),
        };
        let mut acc = 0.0;
        let mut prefix = vec![0.0];
        for i in 0..table.x.len() - 1 {
            let (h, c) = table.seg_coeffs(i);
            acc += h * poly_antideriv(&c, 1.0);
            prefix.push(acc);
        }
        table.iprefix = prefix;
        Ok(table)
    }

    #[inline]
    pub fn x_last(&self) -> f64 {
        *self.x.last().unwrap()
    }

    #[inline]
    pub fn y_last(&self) -> f64 {
        *self.y.last().unwrap()
    }

    /// Index of the segment whose span contains `s` (clamped to end segments).
    fn seg_index(&self, s: f64) -> usize {
        let n = self.x.len();
        self.x.partition_point(|&xi| xi <= s).clamp(1, n - 1) - 1
    }

    /// Cubic coefficients on segment i in the local variable t = (s-x_i)/h,
    /// value = ((a t + b) t + c) t + d.
    fn seg_coeffs(&self, i: usize) -> (f64, [f64; 4]) {
        let h = self.x[i + 1] - self.x[i];
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (hm0, hm1) = (h * self.m[i], h * self.m[i + 1]);
        (
            h,
            [
                2.0 * y0 + hm0 - 2.0 * y1 + hm1,
                -3.0 * y0 - 2.0 * hm0 + 3.0 * y1 - hm1,
                hm0,
                y0,
            ],
        )
    }

    /// Interpolant value; constant extension outside the table span.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.x[0] {
            return self.y[0];
        }
        if s >= self.x_last() {
            return self.y_last();
        }
        let i = self.seg_index(s);
        let (h, c) = self.seg_coeffs(i);
        let t = (s - self.x[i]) / h;
        ((c[0] * t + c[1]) * t + c[2]) * t + c[3]
    }

    /// Exact integral of the (extended) interpolant over [x_first, s].
    pub fn integral(&self, s: f64) -> f64 {
        if s <= self.x[0] {
            return self.y[0] * (s - self.x[0]);
        }
        if s >= self.x_last() {
            return *self.iprefix.last().unwrap() + self.y_last() * (s - self.x_last());
        }
        let i = self.seg_index(s);
        let (h, c) = self.seg_coeffs(i);
        let t = (s - self.x[i]) / h;
        self.iprefix[i] + h * poly_antideriv(&c, t)
    }

    /// Exact maximum of the (extended) interpolant over [a, b].
    pub fn max_on(&self, a: f64, b: f64) -> f64 {
        assert!(b >= a, "max_on interval is reversed");
        let mut best = f64::NEG_INFINITY;
        if a < self.x[0] {
            best = best.max(self.y[0]);
        }
        if b > self.x_last() {
            best = best.max(self.y_last());
        }
        let lo = a.max(self.x[0]);
        let hi = b.min(self.x_last());
        if lo > hi {
            return best;
        }
        let (i0, i1) = (self.seg_index(lo), self.seg_index(hi));
        for i in i0..=i1 {
            let (h, c) = self.seg_coeffs(i);
            let t_lo = ((lo - self.x[i]) / h).max(0.0);
            let t_hi = ((hi - self.x[i]) / h).min(1.0);
            best = best.max(cubic_max_on(&c, t_lo, t_hi));
        }
        best
    }
}

/// Antiderivative of ((a t + b) t + c) t + d at t, vanishing at t = 0.
#[inline]
fn poly_antideriv(c: &[f64; 4], t: f64) -> f64 {
    (((c[0] / 4.0 * t + c[1] / 3.0) * t + c[2] / 2.0) * t + c[3]) * t
}

/// Maximum of the cubic ((a t + b) t + c) t + d over [t_lo, t_hi], from the
/// endpoint values and any interior stationary points.
fn cubic_max_on(c: &[f64; 4], t_lo: f64, t_hi: f64) -> f64 {
    let value = |t: f64| ((c[0] * t + c[1]) * t + c[2]) * t + c[3];
    let mut best = value(t_lo).max(value(t_hi));
    // Stationary points: 3a t^2 + 2b t + c = 0.
    let (qa, qb, qc) = (3.0 * c[0], 2.0 * c[1], c[2]);
    if qa.abs() <= 1e-14 * (qb.abs() + qc.abs()).max(1.0) {
        if qb != 0.0 {
            let t = -qc / qb;
            if t > t_lo && t < t_hi {
                best = best.max(value(t));
            }
        }
        return best;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc >= 0.0 {
        // Citardauq-style pairing avoids cancellation in the smaller root.
        let q = -0.5 * (qb + disc.sqrt().copysign(if qb == 0.0 { 1.0 } else { qb }));
        let mut roots = [q / qa, f64::NAN];
        if q != 0.0 {
            roots[1] = qc / q;
        }
        for t in roots {
            if t.is_finite() && t > t_lo && t < t_hi {
                best = best.max(value(t));
            }
        }
    }
    best
}

/// Shape-preserving knot slopes (Fritsch–Carlson scheme with the standard
/// three-point end formulas and end clamping).
fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}
