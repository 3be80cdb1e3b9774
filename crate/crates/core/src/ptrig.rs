//! Generalized p-trigonometric functions.
//!
//! The pair (cos_p, sin_p) is defined as the unique solution of
//!
//! ```text
//!   x' = -φ_{p'}(y),   y' = φ_p(x),   x(0) = 1,  y(0) = 0,
//! ```
//!
//! with φ_p(s) = |s|^{p-2} s and p' the conjugate exponent. The orbit is the
//! curve |x|^p + (p-1)|y|^{p'} = 1 traversed clockwise in the (x, -y) sense;
//! pi_p denotes its half-period, so cos_p(pi_p) = -1 and both functions are
//! 2 pi_p periodic. At p = 2 the pair reduces to (cos, sin) and pi_p = pi.
//!
//! Evaluation integrates the defining system once per exponent at tight
//! tolerance and keeps the integrator's dense interpolant over a full period;
//! the half-period comes from event detection on the axis crossings of y,
//! refined by bisection on the dense output. The table also carries power
//! series for the inverse functions arcsin_p / arccos_p (hypergeometric-style
//! coefficients, each used only where its argument keeps the series well
//! inside its disk), which provide the p-polar angle of an arbitrary phase
//! point; trajectory angle unwrapping in the shooter is built on that.

use crate::error::{CoreError, Result};
use crate::ode::{integrate, locate_zero, DenseStep, IntegrateOpts, StepControl};

/// Lower bound enforced on p - 1 to keep the machinery away from the
/// degenerate limit p -> 1.
const MIN_P_MINUS_1: f64 = 1e-6;

/// Conjugate exponent p' = p/(p-1).
#[inline]
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Odd power map φ_p(s) = |s|^{p-2} s = |s|^{p-1} sign(s), with φ_p(0) = 0.
///
/// Requires p > 1; validated constructors guard all public entry points.
#[inline]
pub fn phi_p(p: f64, s: f64) -> f64 {
    debug_assert!(p > 1.0);
    if p == 2.0 {
        return s;
    }
    if s == 0.0 {
        return 0.0;
    }
    s.abs().powf(p - 1.0).copysign(s)
}

/// Inverse of φ_p, i.e. φ_{p'}.
#[inline]
pub fn phi_p_inv(p: f64, s: f64) -> f64 {
    phi_p(conjugate_exponent(p), s)
}

/// Validated exponent bundle for dimension n: p, its conjugate, and the
/// critical Sobolev exponent p* = n p / (n - p) (infinite when p >= n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponents {
    pub p: f64,
    pub n: u32,
    pub p_conj: f64,
    pub p_star: f64,
}

impl PExponents {
    pub fn new(p: f64, n: u32) -> Result<Self> {
        if !p.is_finite() || p - 1.0 < MIN_P_MINUS_1 {
            return Err(CoreError::domain(format!(
                "exponent p must satisfy p > 1 (and p - 1 >= {MIN_P_MINUS_1:.0e}), got {p}"
            )));
        }
        if n == 0 {
            return Err(CoreError::domain("dimension n must be a positive integer"));
        }
        let nf = n as f64;
        let p_star = if p < nf {
            nf * p / (nf - p)
        } else {
            f64::INFINITY
        };
        Ok(PExponents {
            p,
            n,
            p_conj: conjugate_exponent(p),
            p_star,
        })
    }
}

/// Integrates the defining system through one full period.
///
/// Returns the accepted steps, the refined half-period, and the refined full
/// period. The span is grown geometrically until two descending/ascending
/// axis crossings of y are observed, so no closed-form period estimate leaks
/// into this code path.
/// Integrates the defining system (x, y)' = (-phi_{p'}(y), phi_p(x)) from
/// (1, 0) across one full period, restarting at every axis crossing.
///
/// phi_p and phi_{p'} have sublinear kinks at 0 whenever their exponent is
/// below 2, and a kink interior to a Runge-Kutta step defeats the embedded
/// error estimate. The phase point crosses an axis exactly once per quarter
/// period, and the first integral |x|^p + (p-1)|y|^{p'} = 1 pins the whole
/// state there, so each quarter restarts from an exact lattice point:
/// (0, ±(p-1)^(-1/p')) on the y-axis, (±1, 0) on the x-axis. That keeps
/// every kink at a segment start, where all stages see the one-sided
/// expansion, and stops state error from accumulating across quarters.
///
/// Returns the accepted steps in increasing order (consecutive quarters
/// overlap by at most one step, so lookups must prefer the latest step
/// covering an abscissa), the half period (first zero of y) and the full
/// period (second zero of y).
fn integrate_period(p: f64, rtol: f64, atol: f64) -> Result<(Vec<DenseStep<2>>, f64, f64)> {
    let pc = conjugate_exponent(p);
    let rhs = move |_phi: f64, xy: &[f64; 2]| [-phi_p(pc, xy[1]), phi_p(p, xy[0])];
    let y_peak = (p - 1.0).powf(-1.0 / pc);

    // Per quarter: which component crosses zero, its sign at the quarter
    // start, and the exact state after the crossing.
    let watch = [0usize, 1, 0, 1];
    let start_sign = [1.0f64, 1.0, -1.0, -1.0];
    let snapped: [[f64; 2]; 4] = [[0.0, y_peak], [-1.0, 0.0], [0.0, -y_peak], [1.0, 0.0]];

    let mut steps: Vec<DenseStep<2>> = Vec::new();
    let mut phi = 0.0f64;
    let mut xy = [1.0f64, 0.0];
    let mut half = 0.0f64;

    for q in 0..4 {
        let mut span = 4.0f64;
        let mut found = false;
        for _ in 0..10 {
            let mut local: Vec<DenseStep<2>> = Vec::new();
            let mut hit: Option<DenseStep<2>> = None;
            let mut opts = IntegrateOpts::<2>::new(rtol, atol);
            opts.h_max = Some((span / 16.0).min(0.4));
            opts.store_dense = false;
            integrate(&rhs, (phi, phi + span), xy, &opts, |step| {
                local.push(step.clone());
                if step.y1[watch[q]] * start_sign[q] <= 0.0 {
                    hit = Some(step.clone());
                    return StepControl::Stop;
                }
                StepControl::Continue
            })?;
            if let Some(step) = hit {
                let phi_star = locate_zero(
                    &step,
                    &move |_phi, v: &[f64; 2]| v[watch[q]],
                    1e-15 * (phi + span),
                );
                steps.append(&mut local);
                phi = phi_star;
                xy = snapped[q];
                if q == 1 {
                    half = phi_star;
                }
                found = true;
                break;
            }
            span *= 2.0;
        }
        if !found {
            return Err(CoreError::not_found(format!(
                "no full period of the p-trigonometric system found for p = {p}"
            )));
        }
    }
    Ok((steps, half, phi))
}

/// Half-period pi_p of (cos_p, sin_p), located by event detection on the
/// defining system and refined by bisection on the dense output to well below
/// `tol` (absolute).
pub fn compute_pi_p(p: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(CoreError::domain("tolerance must be positive"));
    }
    PExponents::new(p, 1)?;
    let rtol = (tol * 1e-2).clamp(1e-13, 1e-9).min(1e-12_f64.max(1e-13));
    let (_, half, _) = integrate_period(p, rtol.min(1e-12), 1e-14)?;
    Ok(half)
}

/// Evaluation table for (cos_p, sin_p) and the inverse angle maps at a fixed
/// exponent. Immutable after construction; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct PTrigTable {
    p: f64,
    p_conj: f64,
    pi_p: f64,
    period: f64,
    steps: Vec<DenseStep<2>>,
    /// Coefficients of arcsin_p(s) = s * Σ_k c_k z^k, z = (p-1)|s|^{p'},
    /// valid for z <= 1/2.
    asin_coeff: Vec<f64>,
    /// Coefficients of ∫_0^c (1-t^p)^{-1/p} dt = c * Σ_k e_k (c^p)^k,
    /// valid for c^p <= 1/2.
    acos_coeff: Vec<f64>,
}

/// Builds the series coefficients a_k / (k q + 1) where Σ a_k w^k expands
/// (1 - w)^{-1/q}; terms are generated until they stop mattering at w = 1/2.
fn inverse_series(q: f64) -> Vec<f64> {
    let mut coeff = Vec::with_capacity(64);
    let mut a = 1.0; // a_0
    for k in 0..400usize {
        let kf = k as f64;
        coeff.push(a / (kf * q + 1.0));
        // a_{k+1} = a_k * (1/q + k) / (k + 1)
        a *= (1.0 / q + kf) / (kf + 1.0);
        if a * 0.5f64.powi(k as i32 + 1) < 1e-19 && k > 4 {
            coeff.push(a / ((kf + 1.0) * q + 1.0));
            break;
        }
    }
    coeff
}

#[inline]
fn horner(coeff: &[f64], z: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeff.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

impl PTrigTable {
    pub fn new(p: f64) -> Result<Self> {
        PExponents::new(p, 1)?;
        let (steps, half, full) = integrate_period(p, 1e-12, 1e-14)?;
        let p_conj = conjugate_exponent(p);
        Ok(PTrigTable {
            p,
            p_conj,
            pi_p: half,
            period: full,
            steps,
            asin_coeff: inverse_series(p_conj),
            acos_coeff: inverse_series(p),
        })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn p_conj(&self) -> f64 {
        self.p_conj
    }

    /// Half-period pi_p.
    #[inline]
    pub fn pi_p(&self) -> f64 {
        self.pi_p
    }

    /// Full period 2 pi_p.
    #[inline]
    pub fn period(&self) -> f64 {
        self.period
    }

    /// (cos_p(phi), sin_p(phi)), extended by periodicity to all of R.
    pub fn cos_sin(&self, phi: f64) -> (f64, f64) {
        let mut t = phi.rem_euclid(self.period);
        if !t.is_finite() {
            t = 0.0;
        }
        // Latest step starting at or before t: quarter-period segments of the
        // table may overlap by one step, and the later segment starts from an
        // exact lattice state, so it wins on the overlap.
        let idx = self
            .steps
            .partition_point(|s| s.r0 <= t)
            .saturating_sub(1)
            .min(self.steps.len() - 1);
        let xy = self.steps[idx].eval(t);
        (xy[0], xy[1])
    }

    pub fn cos_p(&self, phi: f64) -> f64 {
        self.cos_sin(phi).0
    }

    pub fn sin_p(&self, phi: f64) -> f64 {
        self.cos_sin(phi).1
    }

    /// arcsin_p on the principal branch: s in [-s_half, s_half] with
    /// (p-1)|s|^{p'} <= 1/2, i.e. the half of the first quadrant adjacent to
    /// the cos axis. Monotone odd map onto an interval inside
    /// (-pi_p/4-ish, pi_p/4-ish).
    pub fn arcsin_p(&self, s: f64) -> f64 {
        let z = (self.p - 1.0) * s.abs().powf(self.p_conj);
        debug_assert!(z <= 0.5 + 1e-9, "arcsin_p series argument out of range");
        (s.abs() * horner(&self.asin_coeff, z)).copysign(s)
    }

    /// arccos_p on the cos-small branch: c in [-c_half, c_half] with
    /// |c|^p <= 1/2. Returns the angle in (pi_p/4-ish, 3 pi_p/4-ish) with
    /// arccos_p(0) = pi_p/2.
    pub fn arccos_p(&self, c: f64) -> f64 {
        let zp = c.abs().powf(self.p);
        debug_assert!(zp <= 0.5 + 1e-9, "arccos_p series argument out of range");
        let leg = (self.p - 1.0).powf(1.0 / self.p) * c.abs() * horner(&self.acos_coeff, zp);
        0.5 * self.pi_p - leg.copysign(c)
    }

    /// First-quadrant angle of a unit-circle point (|c|^p + (p-1)|s|^{p'} = 1,
    /// c >= 0, s >= 0), choosing whichever inverse series is well conditioned.
    /// Note that s ranges up to (p-1)^{-1/p'}, which exceeds 1 when p < 2; only
    /// c is capped at 1. Rounding drift just past either cap is absorbed here.
    #[inline]
    fn angle_q1(&self, c: f64, s: f64) -> f64 {
        let z = ((self.p - 1.0) * s.powf(self.p_conj)).min(1.0);
        if z <= 0.5 {
            s * horner(&self.asin_coeff, z)
        } else {
            self.arccos_p(c.min(1.0))
        }
    }

    /// p-polar angle in [0, 2 pi_p) of a phase point (x, y) interpreted as
    /// x = ρ^{2/p} cos_p(θ), y = ρ^{2/p'} sin_p(θ) with ρ² = |x|^p + (p-1)|y|^{p'}.
    /// Returns `None` at the origin.
    pub fn angle_of(&self, x: f64, y: f64) -> Option<f64> {
        let rho2 = x.abs().powf(self.p) + (self.p - 1.0) * y.abs().powf(self.p_conj);
        if rho2 <= 0.0 || !rho2.is_finite() {
            return None;
        }
        let c = x.abs() / rho2.powf(1.0 / self.p);
        let s = y.abs() / rho2.powf(1.0 / self.p_conj);
        let q1 = self.angle_q1(c, s);
        let theta = match (x >= 0.0, y >= 0.0) {
            (true, true) => q1,
            (false, true) => self.pi_p - q1,
            (false, false) => self.pi_p + q1,
            (true, false) => self.period - q1,
        };
        Some(if theta >= self.period { 0.0 } else { theta })
    }

    /// Continuous lift: returns the representative of `angle_of(x, y)` whose
    /// distance from `prev` is smallest, assuming the true increment since
    /// `prev` lies in (-pi_p, pi_p].
    pub fn unwrap_from(&self, prev: f64, x: f64, y: f64) -> Option<f64> {
        let base = self.angle_of(x, y)?;
        let mut delta = (base - prev).rem_euclid(self.period);
        if delta > self.pi_p {
            delta -= self.period;
        }
        Some(prev + delta)
    }

    /// Squared p-polar radius ρ² = |x|^p + (p-1)|y|^{p'}.
    #[inline]
    pub fn rho2(&self, x: f64, y: f64) -> f64 {
        x.abs().powf(self.p) + (self.p - 1.0) * y.abs().powf(self.p_conj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson quadrature, test-side oracle helper.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1)
                + simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1)
        }
    }

    fn quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        let m = 0.5 * (a + b);
        simpson(f, a, b, f(a), f(m), f(b), tol, 60)
    }

    /// Independent oracle: the half-period from adaptive quadrature of the
    /// arclength-in-angle integral, split at the diagonal so both pieces stay
    /// away from their endpoint singularities.
    fn pi_p_quadrature_oracle(p: f64) -> f64 {
        let pc = conjugate_exponent(p);
        let tc = 0.5f64.powf(1.0 / p);
        let sc = 0.5f64.powf(1.0 / pc);
        let piece1 = quad(&|t: f64| (1.0 - t.powf(p)).powf(-1.0 / p), 0.0, tc, 1e-13);
        let piece2 = quad(&|s: f64| (1.0 - s.powf(pc)).powf(-1.0 / pc), 0.0, sc, 1e-13);
        2.0 * (p - 1.0).powf(1.0 / p) * (piece1 + (pc / p) * piece2)
    }

    const P_GRID: [f64; 6] = [1.3, 1.5, 2.0, 2.5, 3.0, 4.0];

    #[test]
    fn phi_p_is_odd_and_invertible() {
        for &p in &P_GRID {
            for &s in &[-7.0, -1.0, -1e-3, 0.0, 1e-3, 0.5, 1.0, 3.0, 1e4] {
                assert_eq!(phi_p(p, -s), -phi_p(p, s));
                let round = phi_p_inv(p, phi_p(p, s));
                assert!(
                    (round - s).abs() <= 1e-12 * s.abs().max(1.0),
                    "round trip failed p={p} s={s}: {round}"
                );
            }
        }
    }

    #[test]
    fn pi_p_matches_quadrature_oracle() {
        for &p in &P_GRID {
            let ode = compute_pi_p(p, 1e-12).unwrap();
            let quadrature = pi_p_quadrature_oracle(p);
            assert!(
                (ode - quadrature).abs() <= 1e-8,
                "pi_p mismatch at p={p}: ode={ode:.15}, quad={quadrature:.15}"
            );
        }
    }

    #[test]
    fn pi_2_is_pi() {
        let v = compute_pi_p(2.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn rejects_degenerate_exponent() {
        assert!(compute_pi_p(1.0, 1e-10).is_err());
        assert!(compute_pi_p(0.5, 1e-10).is_err());
        assert!(PTrigTable::new(1.0).is_err());
        assert!(PExponents::new(f64::NAN, 3).is_err());
    }

    #[test]
    fn p_star_matches_definition() {
        let e = PExponents::new(2.0, 3).unwrap();
        assert!((e.p_star - 6.0).abs() < 1e-12);
        assert!(PExponents::new(3.0, 3).unwrap().p_star.is_infinite());
        assert!(PExponents::new(1.5, 3).unwrap().p_star == 3.0 * 1.5 / 1.5);
    }

    #[test]
    fn identity_holds_along_the_period() {
        for &p in &P_GRID {
            let t = PTrigTable::new(p).unwrap();
            let pc = t.p_conj();
            for i in 0..1000 {
                let phi = t.period() * (i as f64) / 999.0 - t.pi_p();
                let (c, s) = t.cos_sin(phi);
                let ident = c.abs().powf(p) + (p - 1.0) * s.abs().powf(pc);
                assert!(
                    (ident - 1.0).abs() <= 1e-8,
                    "identity violated p={p} phi={phi}: {ident}"
                );
            }
        }
    }

    #[test]
    fn reduces_to_circular_functions_at_p_2() {
        let t = PTrigTable::new(2.0).unwrap();
        for i in 0..200 {
            let phi = -7.0 + 14.0 * (i as f64) / 199.0;
            let (c, s) = t.cos_sin(phi);
            assert!((c - phi.cos()).abs() < 1e-10);
            assert!((s - phi.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn sign_pattern_and_axis_values() {
        for &p in &P_GRID {
            let t = PTrigTable::new(p).unwrap();
            let pip = t.pi_p();
            // cos_p > 0 on (-pi_p/2, pi_p/2), sin_p > 0 on (0, pi_p).
            for i in 1..100 {
                let phi = -0.5 * pip + pip * (i as f64) / 100.0;
                assert!(t.cos_p(phi) > 0.0, "cos_p sign p={p} phi={phi}");
                let psi = pip * (i as f64) / 100.0;
                assert!(t.sin_p(psi) > 0.0, "sin_p sign p={p} phi={psi}");
            }
            let (c0, s0) = t.cos_sin(0.0);
            assert!((c0 - 1.0).abs() < 1e-12 && s0.abs() < 1e-12);
            let (ch, sh) = t.cos_sin(pip);
            assert!((ch + 1.0).abs() < 1e-9 && sh.abs() < 1e-9);
            // At the quarter period the sin value is pinned by the identity.
            let (cq, sq) = t.cos_sin(0.5 * pip);
            let s_expect = (p - 1.0).powf(-1.0 / t.p_conj());
            assert!(cq.abs() < 1e-9, "cos at quarter p={p}: {cq}");
            assert!((sq - s_expect).abs() < 1e-9, "sin at quarter p={p}: {sq}");
        }
    }

    #[test]
    fn antiperiodicity_by_half_period() {
        for &p in &[1.5, 3.0] {
            let t = PTrigTable::new(p).unwrap();
            for i in 0..50 {
                let phi = t.period() * (i as f64) / 49.0;
                let (c, s) = t.cos_sin(phi);
                let (c2, s2) = t.cos_sin(phi + t.pi_p());
                assert!((c + c2).abs() < 2e-9, "p={p} phi={phi}");
                assert!((s + s2).abs() < 2e-9, "p={p} phi={phi}");
            }
        }
    }

    #[test]
    fn derivatives_match_power_maps() {
        let h = 1e-5;
        for &p in &P_GRID {
            let t = PTrigTable::new(p).unwrap();
            let pc = t.p_conj();
            for i in 0..60 {
                let phi = t.period() * (i as f64 + 0.31) / 60.0;
                let (c, s) = t.cos_sin(phi);
                let dc = (t.cos_p(phi + h) - t.cos_p(phi - h)) / (2.0 * h);
                let ds = (t.sin_p(phi + h) - t.sin_p(phi - h)) / (2.0 * h);
                assert!(
                    (dc + phi_p(pc, s)).abs() <= 1e-6,
                    "cos' mismatch p={p} phi={phi}: {dc} vs {}",
                    -phi_p(pc, s)
                );
                assert!(
                    (ds - phi_p(p, c)).abs() <= 1e-6,
                    "sin' mismatch p={p} phi={phi}"
                );
            }
        }
    }

    #[test]
    fn angle_inverts_cos_sin_under_polar_scaling() {
        for &p in &P_GRID {
            let t = PTrigTable::new(p).unwrap();
            for &rho in &[0.08f64, 1.0, 6.5] {
                let rho2 = rho * rho;
                for i in 0..400 {
                    let theta = t.period() * (i as f64) / 400.0;
                    let (c, s) = t.cos_sin(theta);
                    let x = rho2.powf(1.0 / p) * c;
                    let y = rho2.powf(1.0 / t.p_conj()) * s;
                    let back = t.angle_of(x, y).unwrap();
                    let mut diff = (back - theta).abs();
                    diff = diff.min((back - theta + t.period()).abs());
                    diff = diff.min((back - theta - t.period()).abs());
                    assert!(
                        diff <= 1e-8,
                        "angle round trip p={p} rho={rho} theta={theta}: {back}"
                    );
                }
            }
        }
    }

    #[test]
    fn angle_of_origin_is_none() {
        let t = PTrigTable::new(2.5).unwrap();
        assert!(t.angle_of(0.0, 0.0).is_none());
    }

    #[test]
    fn unwrap_accumulates_across_period_boundary() {
        let t = PTrigTable::new(1.5).unwrap();
        let mut theta = 0.0;
        let n = 4000;
        for i in 1..=n {
            let true_theta = 3.0 * t.period() * (i as f64) / (n as f64);
            let (c, s) = t.cos_sin(true_theta);
            theta = t.unwrap_from(theta, c, s).unwrap();
            assert!(
                (theta - true_theta).abs() < 1e-7,
                "unwrap drift at i={i}: {theta} vs {true_theta}"
            );
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn phi_p_monotone(p in 1.05..6.0f64, a in -50.0..50.0f64, b in -50.0..50.0f64) {
                prop_assume!(a != b);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                prop_assert!(phi_p(p, lo) < phi_p(p, hi));
            }

            #[test]
            fn identity_random_exponent(p in 1.2..5.0f64, phi in -40.0..40.0f64) {
                let t = PTrigTable::new(p).unwrap();
                let (c, s) = t.cos_sin(phi);
                let ident = c.abs().powf(p) + (p - 1.0) * s.abs().powf(t.p_conj());
                prop_assert!((ident - 1.0).abs() < 1e-7);
            }
        }
    }
}
