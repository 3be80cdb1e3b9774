//! Oracle helpers shared by the integration suites.
//!
//! Everything here is computed from first principles with standard library
//! functions only — no calls into the crate under test — so agreement between
//! these values and the library is evidence, not circularity.

/// Classical half-period of the generalized sine: `2π / (p·sin(π/p))`.
/// At `p = 2` this is exactly `π`.
pub fn classical_half_period(p: f64) -> f64 {
    let pi = std::f64::consts::PI;
    2.0 * pi / (p * (pi / p).sin())
}

/// Closed-form k-th Neumann eigenvalue of the one-dimensional problem
/// `-(|u'|^{p-2}u')' = λ |u|^{p-2}u` on `(0, L)`:
/// `λ_k = (p−1)·((k−1)·π̃_p/L)^p` with the classical half-period `π̃_p`.
pub fn lambda_1d_closed_form(p: f64, k: u32, l: f64) -> f64 {
    let m = f64::from(k - 1);
    (p - 1.0) * (m * classical_half_period(p) / l).powf(p)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            lo * (hi / lo).powf(s)
        })
        .collect()
}

/// Finite-difference discretization of the radial Neumann Laplacian
/// eigenproblem on the unit ball in R³:
/// `−(r² u')' = λ r² u` on `(0, 1)`, zero flux at both ends.
///
/// Finite-volume scheme on `n` cell-centered nodes `r_i = (i+½)h`:
/// flux `r²u'` sampled at the interfaces `jh` (vanishing at `j = 0` and
/// `j = n`), exact cell masses `∫ r² dr`. The constant vector is an exact
/// null vector, so `λ₁ = 0` to rounding. Returns the `count` smallest
/// eigenvalues via Sturm-sequence bisection on the symmetrized tridiagonal
/// matrix.
pub fn fd_ball_neumann_eigenvalues(n: usize, count: usize) -> Vec<f64> {
    assert!(n >= 16 && count >= 1 && count < n);
    let h = 1.0 / n as f64;
    // Interface conductances g_j = (jh)²/h and cell masses m_i.
    let g: Vec<f64> = (0..=n)
        .map(|j| if j == 0 || j == n { 0.0 } else { (j as f64 * h).powi(2) / h })
        .collect();
    let m: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            (b.powi(3) - a.powi(3)) / 3.0
        })
        .collect();
    // Symmetrized tridiagonal T = M^{-1/2} A M^{-1/2}.
    let diag: Vec<f64> = (0..n).map(|i| (g[i] + g[i + 1]) / m[i]).collect();
    let off: Vec<f64> = (1..n).map(|j| -g[j] / (m[j - 1] * m[j]).sqrt()).collect();

    // Number of eigenvalues of T strictly below x (Sturm sequence via LDLᵀ).
    let count_below = |x: f64| -> usize {
        let mut cnt = 0usize;
        let mut q = diag[0] - x;
        if q < 0.0 {
            cnt += 1;
        }
        for i in 1..n {
            if q == 0.0 {
                q = 1e-300;
            }
            q = (diag[i] - x) - off[i - 1] * off[i - 1] / q;
            if q < 0.0 {
                cnt += 1;
            }
        }
        cnt
    };

    let mut hi_all = 0.0f64;
    for i in 0..n {
        let band = diag[i]
            + if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i < n - 1 { off[i].abs() } else { 0.0 };
        hi_all = hi_all.max(band);
    }

    (0..count)
        .map(|k| {
            // k-th smallest: smallest x with count_below(x) > k.
            let mut lo = -1e-6;
            let mut hi = hi_all;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}
