//! Radial Neumann eigenvalues of the weighted p-Laplacian on balls and
//! annuli.
//!
//! The eigenvalue problem is
//!
//! ```text
//!   -(r^(N-1) phi_p(u'))' = lambda r^(N-1) phi_p(u)   on (R1, R2),
//!   u'(R1) = u'(R2) = 0,
//! ```
//!
//! with `phi_p(s) = |s|^(p-2) s`. In generalized polar coordinates
//!
//! ```text
//!   u = rho^(2/p) cos_p(theta),
//!   r^(N-1) phi_p(u') = -rho^(2/p') sin_p(theta),
//! ```
//!
//! the phase angle obeys a scalar first-order equation that does not involve
//! the amplitude:
//!
//! ```text
//!   theta' = (p-1) r^((N-1)(1-p')) |sin_p(theta)|^(p') + lambda r^(N-1) |cos_p(theta)|^p .
//! ```
//!
//! Both right-hand side terms are nonnegative, so the angle is nondecreasing
//! in `r`, and it is strictly increasing in `lambda` for fixed `r`. A datum
//! with `u'(R1) = 0` starts at angle `0`, and the Neumann condition at the
//! outer radius holds exactly when the angle lands on an integer multiple of
//! `pi_p`. The k-th eigenvalue (k = 1, 2, ...) is therefore the unique
//! `lambda >= 0` whose outer angle equals `(k-1) pi_p`; the corresponding
//! eigenfunction changes sign exactly `k-1` times. `lambda_1 = 0` with a
//! constant eigenfunction.
//!
//! Eigenvalues are located by bisection on the outer angle, which this module
//! integrates with the shared adaptive Runge-Kutta core. Eigenfunctions are
//! reconstructed from the full amplitude-angle system, which doubles as a
//! cross-check of the decoupled angle equation.

use crate::error::{CoreError, Result};
use crate::exec::par_map;
use crate::ode::{integrate, IntegrateOpts, StepControl};
use crate::ptrig::{phi_p, phi_p_inv, PTrigTable};
use crate::shooter::RadialDomain;

/// Fixed tolerances for the scalar angle integrations that back the
/// eigenvalue search. The angle is O(k pi_p), so these give absolute angle
/// errors comfortably below the 1e-8 residual target of the bisection.
const ANGLE_RTOL: f64 = 1e-13;
const ANGLE_ATOL: f64 = 1e-15;

/// Acceptance residual on the outer angle at a converged eigenvalue.
const ANGLE_RESIDUAL: f64 = 1e-8;

/// Bracket-expansion ceiling for the eigenvalue search.
const LAMBDA_CEILING: f64 = 1e12;

/// One Neumann eigenvalue together with its phase-angle diagnostics.
#[derive(Debug, Clone)]
pub struct EigenResult {
    /// 1-based index; `k = 1` is the constant eigenfunction at `lambda = 0`.
    pub k: u32,
    /// The eigenvalue.
    pub lambda: f64,
    /// `(r, angle)` at every accepted integration step of the final angle
    /// integration (two endpoints for the exact `lambda = 0` case).
    pub angle_trace: Vec<(f64, f64)>,
    /// Sign changes of the eigenfunction, counted as half-integer multiples
    /// of `pi_p` crossed by the angle trace. Always `k - 1`.
    pub zero_count: u32,
}

/// Phase angle at the outer radius together with the accumulated trace.
#[derive(Debug, Clone)]
pub struct AngleSolution {
    /// Angle at `r = R2`.
    pub angle: f64,
    /// `(r, angle)` at accepted steps; empty unless a trace was requested.
    pub trace: Vec<(f64, f64)>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(CoreError::domain(format!(
            "eigenvalue parameter must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(())
}

/// Integrates the decoupled angle equation from the inner to the outer
/// radius for a given `lambda`, starting from angle `0` (Neumann datum).
///
/// Balls start at a small radius `delta0` with the leading-order angle
/// `lambda delta0^N / N`: integrating the potential term of the angle
/// equation from `0` gives `lambda r^N / N + O(r^(N + p'))`, and the kinetic
/// term only contributes at the higher order `r^(N + p'/(p-1))`, so the
/// truncation is far below the integration tolerances.
pub fn phase_angle(
    domain: &RadialDomain,
    trig: &PTrigTable,
    lambda: f64,
    want_trace: bool,
) -> Result<AngleSolution> {
    check_lambda(lambda)?;
    let p = trig.p();
    let pc = trig.p_conj();
    let nm1 = f64::from(domain.n - 1);

    if lambda == 0.0 {
        // theta == 0 solves the equation exactly: both terms vanish there.
        let trace = if want_trace {
            vec![(domain.r_inner, 0.0), (domain.r_outer, 0.0)]
        } else {
            Vec::new()
        };
        return Ok(AngleSolution { angle: 0.0, trace });
    }

    let (r_start, theta_start) = if domain.is_ball() {
        let delta0 = 1e-6f64.min(domain.r_outer * 1e-8);
        (delta0, lambda * delta0.powf(f64::from(domain.n)) / f64::from(domain.n))
    } else {
        (domain.r_inner, 0.0)
    };

    // theta' = (p-1) r^((N-1)(1-p')) |sin_p|^(p') + lambda r^(N-1) |cos_p|^p
    let kin_exp = nm1 * (1.0 - pc);
    let rhs = |r: f64, y: &[f64; 1]| {
        let (c, s) = trig.cos_sin(y[0]);
        [(p - 1.0) * r.powf(kin_exp) * s.abs().powf(pc)
            + lambda * r.powf(nm1) * c.abs().powf(p)]
    };

    // |s|^e has unbounded curvature at s = 0 when e < 2, and exactly one of
    // the two exponents is below 2 unless p = 2. Such a kink interior to a
    // Runge-Kutta step defeats the embedded error estimate (both embedded
    // solutions sample mostly smooth regions around it), so the integration
    // is restarted at every crossing of a kink level: within a segment the
    // kink sits at the left endpoint, where the one-sided expansion is
    // visible to every stage. For p > 2 the kinks are the zeros of sin_p
    // (multiples of pi_p); for p < 2 the zeros of cos_p (offset by pi_p/2);
    // for p = 2 the equation is smooth and no splitting happens.
    let opts = IntegrateOpts::<1> {
        store_dense: false,
        ..IntegrateOpts::new(ANGLE_RTOL, ANGLE_ATOL)
    };
    let pi_p = trig.pi_p();
    let kink_offset = if p > 2.0 {
        Some(0.0)
    } else if p < 2.0 {
        Some(0.5 * pi_p)
    } else {
        None
    };
    let mut trace = Vec::new();
    if want_trace {
        trace.push((r_start, theta_start));
    }
    let mut r = r_start;
    let mut theta = theta_start;
    for _ in 0..10_000 {
        // Smallest kink level strictly above the current angle; +infinity
        // when the equation is smooth (single-segment integration).
        let level = match kink_offset {
            Some(o) => o + (((theta - o) / pi_p + 1e-9).floor() + 1.0) * pi_p,
            None => f64::INFINITY,
        };
        let mut crossing: Option<(f64, f64)> = None;
        let sol = integrate(&rhs, (r, domain.r_outer), [theta], &opts, |step| {
            if step.y1[0] >= level {
                let r_cross = crate::ode::locate_zero(
                    step,
                    &|_r, y: &[f64; 1]| y[0] - level,
                    1e-13 * domain.span(),
                );
                crossing = Some((r_cross, level));
                if want_trace {
                    trace.push((r_cross, level));
                }
                return StepControl::Stop;
            }
            if want_trace {
                trace.push((step.r1(), step.y1[0]));
            }
            StepControl::Continue
        })?;
        match crossing {
            Some((r_cross, level)) if r_cross < domain.r_outer => {
                r = r_cross;
                theta = level;
            }
            Some((_, level)) => return Ok(AngleSolution { angle: level, trace }),
            None => return Ok(AngleSolution { angle: sol.y_end[0], trace }),
        }
    }
    Err(CoreError::numeric(
        "angle integration exceeded the kink-segment budget",
        r,
        &[theta],
    ))
}

/// Phase angle at the outer radius for a given `lambda` (no trace).
pub fn phase_angle_at_outer(
    domain: &RadialDomain,
    trig: &PTrigTable,
    lambda: f64,
) -> Result<f64> {
    Ok(phase_angle(domain, trig, lambda, false)?.angle)
}

/// Counts the half-integer multiples of `pi_p` crossed by a monotone angle
/// trace; each crossing is one sign change of `cos_p(theta)`, hence of the
/// eigenfunction.
fn count_sign_changes(trace: &[(f64, f64)], pi_p: f64) -> u32 {
    let cell = |theta: f64| (theta / pi_p + 0.5).floor();
    let mut count = 0u32;
    for w in trace.windows(2) {
        let d = cell(w[1].1) - cell(w[0].1);
        if d > 0.0 {
            count += d as u32;
        }
    }
    count
}

/// Finds the k-th Neumann eigenvalue (k >= 1) by bisection on the outer
/// angle.
///
/// `tol` controls the relative eigenvalue resolution: the bracket is shrunk
/// until its width is at most `tol * max(1, lambda)` **and** the outer angle
/// at the returned `lambda` is within `1e-8` of `(k-1) pi_p`. The initial
/// bracket `[0, 1]` is grown geometrically; if the angle still falls short of
/// the target at `lambda = 1e12` the search reports `NotFound`.
pub fn find_eigenvalue(
    domain: &RadialDomain,
    trig: &PTrigTable,
    k: u32,
    tol: f64,
) -> Result<EigenResult> {
    if k < 1 {
        return Err(CoreError::domain("eigenvalue index k must be >= 1"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CoreError::domain(format!(
            "eigenvalue tolerance must lie in (0, 1), got {tol}"
        )));
    }

    let pi_p = trig.pi_p();
    if k == 1 {
        // The constant eigenfunction: angle identically zero.
        let sol = phase_angle(domain, trig, 0.0, true)?;
        return Ok(EigenResult { k, lambda: 0.0, angle_trace: sol.trace, zero_count: 0 });
    }

    let target = f64::from(k - 1) * pi_p;
    let angle_at = |lambda: f64| phase_angle_at_outer(domain, trig, lambda);

    // Grow the bracket until the outer angle exceeds the target. The angle
    // is strictly increasing in lambda, so [lo, hi] brackets the eigenvalue
    // as soon as angle(hi) >= target > angle(lo).
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut a_hi = angle_at(hi)?;
    while a_hi < target {
        lo = hi;
        hi *= 4.0;
        if hi > LAMBDA_CEILING {
            return Err(CoreError::not_found(format!(
                "outer angle reaches only {a_hi:.6} < {target:.6} at lambda = {LAMBDA_CEILING:.1e}; \
                 eigenvalue k = {k} is out of reach on this domain"
            )));
        }
        a_hi = angle_at(hi)?;
    }

    let mut lambda = 0.5 * (lo + hi);
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..500 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at floating-point resolution
        }
        lambda = mid;
        let a = angle_at(mid)?;
        residual = (a - target).abs();
        if a < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * lambda.max(1.0) && residual <= ANGLE_RESIDUAL {
            converged = true;
            break;
        }
    }
    if !converged && residual > ANGLE_RESIDUAL {
        return Err(CoreError::numeric(
            format!(
                "eigenvalue bisection stalled with outer-angle residual {residual:.3e} \
                 (target {ANGLE_RESIDUAL:.1e}) for k = {k}"
            ),
            lambda,
            &[residual],
        ));
    }

    let sol = phase_angle(domain, trig, lambda, true)?;
    let zero_count = count_sign_changes(&sol.trace, pi_p);
    if zero_count != k - 1 {
        return Err(CoreError::consistency(format!(
            "eigenvalue k = {k} at lambda = {lambda:.6e} produced {zero_count} sign \
             changes instead of {}",
            k - 1
        )));
    }
    Ok(EigenResult { k, lambda, angle_trace: sol.trace, zero_count })
}

/// Finds eigenvalues `k = 1 ..= k_max`. The per-index bisections are
/// independent and run through the data-parallel map.
pub fn find_eigenvalues(
    domain: &RadialDomain,
    trig: &PTrigTable,
    k_max: u32,
    tol: f64,
) -> Result<Vec<EigenResult>> {
    if k_max < 1 {
        return Err(CoreError::domain("k_max must be >= 1"));
    }
    let ks: Vec<u32> = (1..=k_max).collect();
    par_map(&ks, |&k| find_eigenvalue(domain, trig, k, tol))
        .into_iter()
        .collect()
}

/// One sample of a reconstructed eigenfunction.
#[derive(Debug, Clone, Copy)]
pub struct EigenSample {
    pub r: f64,
    /// Eigenfunction value, normalized so the inner datum is `1`.
    pub u: f64,
    /// Its derivative.
    pub uprime: f64,
    /// Phase angle from the full amplitude-angle system.
    pub theta: f64,
}

/// Reconstructs the eigenfunction profile at a given `lambda` by integrating
/// the full amplitude-angle system
///
/// ```text
///   rho'   = (p / (2 rho)) (1 - lambda r^((N-1) p')) phi_p(u) u',
///   theta' = (r^(N-1) / rho^2) [ (p-1) |u'|^p + lambda |u|^p ],
/// ```
///
/// with `u`, `u'` recovered from the polar map. The angle component is the
/// same quantity as [`phase_angle`] computes from the decoupled scalar
/// equation, so comparing the two end angles cross-validates both paths.
///
/// `min_samples` caps the step size at `span / min_samples` so oscillatory
/// profiles are resolved in the returned samples.
pub fn reconstruct_eigenfunction(
    domain: &RadialDomain,
    trig: &PTrigTable,
    lambda: f64,
    min_samples: usize,
) -> Result<Vec<EigenSample>> {
    check_lambda(lambda)?;
    if min_samples < 2 {
        return Err(CoreError::domain("min_samples must be >= 2"));
    }
    let p = trig.p();
    let pc = trig.p_conj();
    let nm1 = f64::from(domain.n - 1);

    let (r_start, theta_start) = if domain.is_ball() {
        let delta0 = 1e-6f64.min(domain.r_outer * 1e-8);
        (delta0, lambda * delta0.powf(f64::from(domain.n)) / f64::from(domain.n))
    } else {
        (domain.r_inner, 0.0)
    };

    // State y = [rho, theta]; the datum u(R1) = 1, u'(R1) = 0 maps to
    // rho = 1, theta = 0 (up to the ball startup shift above).
    let recover = |r: f64, rho: f64, theta: f64| {
        let (c, s) = trig.cos_sin(theta);
        let u = rho.powf(2.0 / p) * c;
        let w = -rho.powf(2.0 / pc) * s; // r^(N-1) phi_p(u')
        let uprime = phi_p_inv(p, w / r.powf(nm1));
        (u, uprime)
    };
    let rhs = |r: f64, y: &[f64; 2]| {
        let rho = y[0];
        let (u, uprime) = recover(r, rho, y[1]);
        let rho_dot =
            0.5 * p / rho * (1.0 - lambda * r.powf(nm1 * pc)) * phi_p(p, u) * uprime;
        let theta_dot = r.powf(nm1) / (rho * rho)
            * ((p - 1.0) * uprime.abs().powf(p) + lambda * u.abs().powf(p));
        [rho_dot, theta_dot]
    };

    let opts = IntegrateOpts::<2> {
        store_dense: false,
        h_max: Some(domain.span() / min_samples as f64),
        ..IntegrateOpts::new(1e-10, 1e-12)
    };
    let mut samples = Vec::with_capacity(min_samples + 8);
    let push = |samples: &mut Vec<EigenSample>, r: f64, rho: f64, theta: f64| {
        let (u, uprime) = recover(r, rho, theta);
        samples.push(EigenSample { r, u, uprime, theta });
    };
    push(&mut samples, r_start, 1.0, theta_start);
    integrate(&rhs, (r_start, domain.r_outer), [1.0, theta_start], &opts, |step| {
        push(&mut samples, step.r1(), step.y1[0], step.y1[1]);
        StepControl::Continue
    })?;
    Ok(samples)
}
