//! Radial shooting machinery for the planar Neumann phase system.
//!
//! For a radial domain (ball or annulus) and a nonlinearity `f`, the radial
//! equation is rewritten as the first-order system
//!
//! ```text
//! u' = φ_{p'}(v / r^{N−1}),    v' = −r^{N−1} f̂(u),
//! ```
//!
//! started at the inner boundary with `u = d`, `v = 0`. This module
//! integrates that Cauchy problem with event detection (level crossings of
//! `u`, sign recovery of `v`), records an energy trace, accumulates the
//! continuous p-polar winding angle of the phase point around the
//! equilibrium `(1, 0)`, and provides independent accuracy diagnostics: a
//! conservation-law residual that must vanish for every value of a free
//! parameter, and a cross-validation integrator that solves the polar
//! (ρ, θ) form of the same system directly.

use crate::error::{CoreError, Result};
use crate::exec::par_map;
use crate::nonlinearity::Nonlinearity;
use crate::ode::{integrate, DenseStep, ErrorNorm, IntegrateOpts, StepControl, locate_zero};
use crate::ptrig::{phi_p, phi_p_inv, PTrigTable};

/// Shape of the radial domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Ball,
    Annulus,
}

/// Radial domain: a ball of radius `r_outer` or an annulus
/// `r_inner < |x| < r_outer` in dimension `n`.
#[derive(Debug, Clone, Copy)]
pub struct RadialDomain {
    pub kind: DomainKind,
    /// Inner radius; 0 exactly for a ball.
    pub r_inner: f64,
    /// Outer radius.
    pub r_outer: f64,
    /// Space dimension N ≥ 1.
    pub n: u32,
}

impl RadialDomain {
    pub fn ball(r_outer: f64, n: u32) -> Result<Self> {
        if !(r_outer > 0.0) || !r_outer.is_finite() || n < 1 {
            return Err(CoreError::domain(format!(
                "ball needs a finite positive radius and N >= 1, got R2 = {r_outer}, N = {n}"
            )));
        }
        Ok(RadialDomain { kind: DomainKind::Ball, r_inner: 0.0, r_outer, n })
    }

    pub fn annulus(r_inner: f64, r_outer: f64, n: u32) -> Result<Self> {
        if !(r_inner > 0.0) || !(r_outer > r_inner) || !r_outer.is_finite() || n < 1 {
            return Err(CoreError::domain(format!(
                "annulus needs 0 < R1 < R2 < infinity and N >= 1, got R1 = {r_inner}, R2 = {r_outer}, N = {n}"
            )));
        }
        Ok(RadialDomain { kind: DomainKind::Annulus, r_inner, r_outer, n })
    }

    #[inline]
    pub fn is_ball(&self) -> bool {
        self.kind == DomainKind::Ball
    }

    #[inline]
    pub fn span(&self) -> f64 {
        self.r_outer - self.r_inner
    }
}

/// One phase point: `v = r^{N−1} φ_p(u')`, so `u'` is recoverable for r > 0.
#[derive(Debug, Clone, Copy)]
pub struct PhaseState {
    pub r: f64,
    pub u: f64,
    pub v: f64,
}

/// Energy value `H = |u'|^p / p' + F̂(u)` at one radius.
#[derive(Debug, Clone, Copy)]
pub struct EnergySnapshot {
    pub r: f64,
    pub h: f64,
}

/// A problem instance: domain, nonlinearity, and the p-trigonometric table
/// used for winding-angle extraction. Immutable and shareable across threads.
#[derive(Debug)]
pub struct Problem {
    pub domain: RadialDomain,
    pub f: Nonlinearity,
    pub trig: PTrigTable,
}

impl Problem {
    pub fn new(domain: RadialDomain, f: Nonlinearity) -> Result<Self> {
        if domain.n != f.exps.n {
            return Err(CoreError::domain(format!(
                "domain dimension N = {} disagrees with the nonlinearity's N = {}",
                domain.n, f.exps.n
            )));
        }
        let trig = PTrigTable::new(f.exps.p)?;
        Ok(Problem { domain, f, trig })
    }

    /// Recovers `u' = φ_{p'}(v / r^{N−1})` from a phase point.
    pub fn uprime(&self, s: &PhaseState) -> f64 {
        if s.v == 0.0 {
            return 0.0;
        }
        let nm1 = self.domain.n as f64 - 1.0;
        phi_p_inv(self.f.exps.p, s.v / s.r.powf(nm1))
    }

    /// Energy `H = |u'|^p / p' + F̂(u)`, using `|u'|^p = |v / r^{N−1}|^{p'}`.
    pub fn energy(&self, s: &PhaseState) -> f64 {
        let pc = self.f.exps.p_conj;
        let kinetic = if s.v == 0.0 {
            0.0
        } else {
            let nm1 = self.domain.n as f64 - 1.0;
            (s.v.abs() / s.r.powf(nm1)).powf(pc) / pc
        };
        kinetic + self.f.big_f_hat(s.u)
    }
}

/// Integration controls for one shot.
#[derive(Debug, Clone)]
pub struct ShootOpts {
    pub rtol: f64,
    pub atol: f64,
    /// Cap on the accepted step length.
    pub h_max: Option<f64>,
    /// Stop integrating once the winding angle reaches this value.
    pub theta_cap: Option<f64>,
    /// Keep the dense interpolant (needed by `Trajectory::eval` and the
    /// conservation residual).
    pub store_dense: bool,
    /// Record every k-th accepted step into the sample traces (the initial
    /// and final points are always recorded). Use a large value for scans
    /// that only need endpoint data and events.
    pub record_every: usize,
    /// Accumulate the winding angle (forced on when `theta_cap` is set).
    pub track_theta: bool,
}

impl Default for ShootOpts {
    fn default() -> Self {
        ShootOpts {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: None,
            theta_cap: None,
            store_dense: true,
            record_every: 1,
            track_theta: true,
        }
    }
}

impl ShootOpts {
    /// Lean profile for parameter scans: no dense storage, endpoint-only
    /// sampling, step length capped so the winding angle is sampled densely
    /// enough along fast spirals.
    pub fn scan(domain: &RadialDomain) -> Self {
        ShootOpts {
            store_dense: false,
            record_every: usize::MAX,
            h_max: Some(domain.span() / 512.0),
            ..ShootOpts::default()
        }
    }
}

/// Ball startup data: on `[0, δ₀]` the integral form of the equation gives
/// `u ≈ d`, `v ≈ −r^N f̂(d) / N`, which is regular although the differential
/// form has a singular first-order coefficient at r = 0.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Startup {
    pub delta0: f64,
    pub d: f64,
    pub fd: f64,
    pub nf: f64,
}

/// Result of one shot: sampled traces plus event radii.
#[derive(Debug)]
pub struct Trajectory {
    /// Initial datum u(R₁).
    pub d: f64,
    /// Recorded phase points, increasing in r.
    pub samples: Vec<PhaseState>,
    /// First radius where u drops to η·d (tracked when d > 1/η).
    pub r0: Option<f64>,
    /// First zero of u, or the outer radius if u never vanishes.
    pub r1: f64,
    /// Energy at each recorded sample.
    pub energy: Vec<EnergySnapshot>,
    /// p-polar radius ρ of (u−1, −v) at each recorded sample.
    pub rho: Vec<f64>,
    /// Continuous winding angle at each recorded sample (NaN when angle
    /// tracking is off or the trajectory is the constant equilibrium).
    pub theta: Vec<f64>,
    /// Rescaled momentum w = R₂^{1−N} v at each recorded sample.
    pub w: Vec<f64>,
    /// First radius where v returns to 0 from below, if any.
    pub first_v_upcross: Option<f64>,
    /// True when a theta cap ended the integration before the outer radius.
    pub stopped_early: bool,
    /// True for the constant equilibrium trajectory d = 1.
    pub is_constant: bool,
    pub n_accepted: usize,
    pub n_rejected: usize,
    pub(crate) dense: Vec<DenseStep<2>>,
    pub(crate) startup: Option<Startup>,
}

impl Trajectory {
    /// Final winding angle (NaN when tracking was off).
    pub fn theta_end(&self) -> f64 {
        self.theta.last().copied().unwrap_or(f64::NAN)
    }

    /// Last recorded radius (equals the outer radius unless stopped early).
    pub fn r_end(&self) -> f64 {
        self.samples.last().map(|s| s.r).unwrap_or(f64::NAN)
    }

    /// Evaluates the stored interpolant at any radius in the integrated
    /// span. Needs `store_dense`; the ball startup zone uses the asymptotic
    /// form directly.
    pub fn eval(&self, r: f64) -> Result<PhaseState> {
        if self.is_constant {
            return Ok(PhaseState { r, u: 1.0, v: 0.0 });
        }
        if let Some(st) = &self.startup {
            if r < st.delta0 {
                return Ok(PhaseState { r, u: st.d, v: -r.powf(st.nf) * st.fd / st.nf });
            }
        }
        if self.dense.is_empty() {
            return Err(CoreError::domain(
                "trajectory evaluation needs dense storage (ShootOpts::store_dense)",
            ));
        }
        let idx = self
            .dense
            .partition_point(|s| s.r1() < r)
            .min(self.dense.len() - 1);
        let y = self.dense[idx].eval(r);
        Ok(PhaseState { r, u: y[0], v: y[1] })
    }

}

/// Integrates one shot from the inner boundary to the outer radius.
///
/// The datum d = 1 returns the constant equilibrium trajectory immediately.
/// For a ball the integration starts at δ₀ = min(1e−6, R₂·1e−8) from the
/// regular integral-form asymptotics. Events located on the dense output:
/// the first zero of u (`r1`, ties toward smaller r), the first drop of u to
/// η·d (`r0`, tracked when d > 1/η), and the first upward sign recovery of v.
pub fn integrate_cauchy(prob: &Problem, d: f64, opts: &ShootOpts) -> Result<Trajectory> {
    if !d.is_finite() || d < 0.0 {
        return Err(CoreError::domain(format!(
            "initial datum must be finite and nonnegative, got {d}"
        )));
    }
    let dom = &prob.domain;
    let r2 = dom.r_outer;
    if d == 1.0 {
        let snap = |r: f64| EnergySnapshot { r, h: 0.0 };
        return Ok(Trajectory {
            d,
            samples: vec![
                PhaseState { r: dom.r_inner, u: 1.0, v: 0.0 },
                PhaseState { r: r2, u: 1.0, v: 0.0 },
            ],
            r0: None,
            r1: r2,
            energy: vec![snap(dom.r_inner), snap(r2)],
            rho: vec![0.0, 0.0],
            theta: vec![f64::NAN, f64::NAN],
            w: vec![0.0, 0.0],
            first_v_upcross: None,
            stopped_early: false,
            is_constant: true,
            n_accepted: 0,
            n_rejected: 0,
            dense: Vec::new(),
            startup: None,
        });
    }

    let p = prob.f.exps.p;
    let nf = dom.n as f64;
    let nm1 = nf - 1.0;
    let f = &prob.f;
    let trig = &prob.trig;

    let (r_start, y_start, startup) = match dom.kind {
        DomainKind::Ball => {
            let delta0 = 1e-6f64.min(r2 * 1e-8);
            let fd = f.f_hat(d);
            (
                delta0,
                [d, -delta0.powf(nf) * fd / nf],
                Some(Startup { delta0, d, fd, nf }),
            )
        }
        DomainKind::Annulus => (dom.r_inner, [d, 0.0], None),
    };

    let rhs = move |r: f64, y: &[f64; 2]| -> [f64; 2] {
        let rn = r.powf(nm1);
        [phi_p_inv(p, y[1] / rn), -rn * f.f_hat(y[0])]
    };

    let mut iopts = IntegrateOpts::<2>::new(opts.rtol, opts.atol);
    iopts.h_max = opts.h_max;
    iopts.store_dense = opts.store_dense;
    if p > 2.0 {
        // φ_{p'} has exponent p'−1 < 1: its derivative blows up at v = 0 and
        // floods the u-component error estimate on steps straddling the axis.
        iopts.error_norm = ErrorNorm::AxisGuarded { component: 1 };
    }

    let track_theta = opts.track_theta || opts.theta_cap.is_some();
    let theta0 = if track_theta {
        match trig.angle_of(y_start[0] - 1.0, -y_start[1]) {
            Some(t) => t,
            None => {
                return Err(CoreError::numeric(
                    "p-polar angle undefined at the initial point",
                    r_start,
                    &y_start,
                ))
            }
        }
    } else {
        f64::NAN
    };

    let record_every = opts.record_every.max(1);
    let eta = f.eta();
    let track_r0 = d > 1.0 / eta;
    let eta_d = eta * d;
    let xtol = (opts.rtol * dom.span()).max(4.0 * f64::EPSILON * r2);

    let mut samples = vec![PhaseState { r: r_start, u: y_start[0], v: y_start[1] }];
    let mut theta_trace = vec![theta0];
    let mut rho_trace = vec![trig.rho2(y_start[0] - 1.0, -y_start[1]).sqrt()];
    let w_scale = r2.powf(1.0 - nf);
    let mut w_trace = vec![w_scale * y_start[1]];
    let mut energy = vec![EnergySnapshot {
        r: r_start,
        h: prob.energy(&samples[0]),
    }];

    let mut r0_found: Option<f64> = None;
    let mut r1_found: Option<f64> = if d == 0.0 { Some(r_start) } else { None };
    let mut v_up: Option<f64> = None;
    let mut theta_prev = theta0;
    let mut theta_failure: Option<(String, f64, [f64; 2])> = None;
    let mut step_idx: usize = 0;
    let mut capped = false;

    let sol = integrate(&rhs, (r_start, r2), y_start, &iopts, |step| {
        step_idx += 1;
        if r1_found.is_none() && step.y0[0] > 0.0 && step.y1[0] <= 0.0 {
            r1_found = Some(locate_zero(step, &|_r, y: &[f64; 2]| y[0], xtol));
        }
        if track_r0 && r0_found.is_none() && step.y0[0] > eta_d && step.y1[0] <= eta_d {
            r0_found = Some(locate_zero(step, &|_r, y: &[f64; 2]| y[0] - eta_d, xtol));
        }
        if v_up.is_none() && step.y0[1] < 0.0 && step.y1[1] >= 0.0 {
            v_up = Some(locate_zero(step, &|_r, y: &[f64; 2]| y[1], xtol));
        }
        if track_theta {
            match unwrap_over_step(trig, step, theta_prev) {
                Ok(t) => theta_prev = t,
                Err(msg) => {
                    theta_failure = Some((msg, step.r1(), step.y1));
                    return StepControl::Stop;
                }
            }
        }
        let at_cap = opts.theta_cap.map_or(false, |cap| theta_prev >= cap);
        if step_idx % record_every == 0 || at_cap {
            let s = PhaseState { r: step.r1(), u: step.y1[0], v: step.y1[1] };
            energy.push(EnergySnapshot { r: s.r, h: prob.energy(&s) });
            rho_trace.push(trig.rho2(s.u - 1.0, -s.v).sqrt());
            theta_trace.push(theta_prev);
            w_trace.push(w_scale * s.v);
            samples.push(s);
        }
        if at_cap {
            capped = true;
            return StepControl::Stop;
        }
        StepControl::Continue
    })?;

    if let Some((msg, r, y)) = theta_failure {
        return Err(CoreError::numeric(msg, r, &y));
    }

    // Always record the final point.
    if samples.last().map_or(true, |s| s.r != sol.r_end) {
        let s = PhaseState { r: sol.r_end, u: sol.y_end[0], v: sol.y_end[1] };
        energy.push(EnergySnapshot { r: s.r, h: prob.energy(&s) });
        rho_trace.push(trig.rho2(s.u - 1.0, -s.v).sqrt());
        theta_trace.push(theta_prev);
        w_trace.push(w_scale * s.v);
        samples.push(s);
    }

    Ok(Trajectory {
        d,
        samples,
        r0: r0_found,
        r1: r1_found.unwrap_or(r2),
        energy,
        rho: rho_trace,
        theta: theta_trace,
        w: w_trace,
        first_v_upcross: v_up,
        stopped_early: capped,
        is_constant: false,
        n_accepted: sol.n_accepted,
        n_rejected: sol.n_rejected,
        dense: sol.steps,
        startup,
    })
}

/// Advances the continuous angle across one accepted step, subdividing the
/// dense interpolant until every sub-increment is safely below a half-turn
/// (the unwrap is only faithful for increments in (−π_p, π_p]).
fn unwrap_over_step(
    trig: &PTrigTable,
    step: &DenseStep<2>,
    prev: f64,
) -> std::result::Result<f64, String> {
    let half = 0.5 * trig.pi_p();
    let subdivisions: [usize; 6] = [1, 4, 16, 64, 256, 1024];
    'attempt: for (ai, &m) in subdivisions.iter().enumerate() {
        let last_attempt = ai == subdivisions.len() - 1;
        let mut th = prev;
        for k in 1..=m {
            let y = if k == m {
                step.y1
            } else {
                step.eval(step.r0 + step.h * (k as f64) / (m as f64))
            };
            match trig.unwrap_from(th, y[0] - 1.0, -y[1]) {
                Some(next) => {
                    if (next - th).abs() >= half && !last_attempt {
                        continue 'attempt;
                    }
                    th = next;
                }
                None => {
                    return Err(format!(
                        "p-polar angle undefined near r = {}: phase point at the equilibrium (1, 0)",
                        step.r1()
                    ))
                }
            }
        }
        return Ok(th);
    }
    unreachable!("subdivision loop always returns");
}

/// Energy trace report: the per-sample energies plus the worst upward jump
/// (exact monotone decay would give 0; discretization leaves rounding dust).
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub snapshots: Vec<EnergySnapshot>,
    pub max_upward_jump: f64,
    pub monotone: bool,
}

/// Summarizes the energy evolution along a trajectory.
pub fn energy_trace(traj: &Trajectory) -> EnergyReport {
    let mut worst: f64 = 0.0;
    for w in traj.energy.windows(2) {
        worst = worst.max(w[1].h - w[0].h);
    }
    EnergyReport {
        snapshots: traj.energy.clone(),
        max_upward_jump: worst,
        monotone: worst <= 0.0,
    }
}

const GL5_NODES: [f64; 5] = [
    -0.906179845938664,
    -0.5384693101056831,
    0.0,
    0.5384693101056831,
    0.906179845938664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.23692688505618908,
    0.47862867049936647,
    0.5688888888888889,
    0.47862867049936647,
    0.23692688505618908,
];

fn gauss5(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..5 {
        s += GL5_WEIGHTS[i] * g(c + h * GL5_NODES[i]);
    }
    s * h
}

/// Conservation-law residual: for every real `a` the bracket
/// `r^N (|u'|^p/p' + F̂(u)) + a r^{N−1} u φ_p(u')` changes along the
/// trajectory exactly by the integral of
/// `r^{N−1} [(1 − N/p + a)|u'|^p + N F̂(u) − a f̂(u) u]`.
/// Returns `|LHS(r_end) − LHS(r_start) − ∫ RHS| / (1 + |LHS(r_end)|)`, which
/// must vanish to integration accuracy. Needs dense storage.
pub fn pohozaev_residual(prob: &Problem, traj: &Trajectory, a: f64) -> Result<f64> {
    if traj.is_constant {
        return Ok(0.0);
    }
    if traj.dense.is_empty() {
        return Err(CoreError::domain(
            "conservation residual needs dense storage (ShootOpts::store_dense)",
        ));
    }
    let p = prob.f.exps.p;
    let pc = prob.f.exps.p_conj;
    let nf = prob.domain.n as f64;
    let nm1 = nf - 1.0;
    let coeff = 1.0 - nf / p + a;
    let f = &prob.f;

    let integrand = |r: f64, y: &[f64; 2]| -> f64 {
        let rn = r.powf(nm1);
        let dup = if y[1] == 0.0 { 0.0 } else { (y[1].abs() / rn).powf(pc) };
        rn * (coeff * dup + nf * f.big_f_hat(y[0]) - a * f.f_hat(y[0]) * y[0])
    };

    let mut integral = 0.0;
    for st in &traj.dense {
        let g = |r: f64| {
            let y = st.eval(r);
            integrand(r, &y)
        };
        // |u'|^p and f̂ lose smoothness where v or u cross 0; split the
        // quadrature panel at those points so each piece stays regular.
        let mut cuts = vec![st.r0, st.r1()];
        if st.y0[1] * st.y1[1] < 0.0 {
            cuts.push(locate_zero(st, &|_r, y: &[f64; 2]| y[1], 1e-13 * st.h.abs().max(1e-8)));
        }
        if st.y0[0] * st.y1[0] < 0.0 {
            cuts.push(locate_zero(st, &|_r, y: &[f64; 2]| y[0], 1e-13 * st.h.abs().max(1e-8)));
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for pair in cuts.windows(2) {
            integral += gauss5(&g, pair[0], pair[1]);
        }
    }
    if let Some(su) = &traj.startup {
        // Startup zone [0, δ₀]: u ≡ d, |u'|^p = (r |f̂(d)| / N)^{p'}.
        let d0 = su.delta0;
        let fd_n = su.fd.abs() / nf;
        integral += coeff * fd_n.powf(pc) * d0.powf(nf + pc) / (nf + pc)
            + (nf * f.big_f_hat(su.d) - a * f.f_hat(su.d) * su.d) * d0.powf(nf) / nf;
    }

    let lhs_at = |s: &PhaseState| s.r.powf(nf) * prob.energy(s) + a * s.u * s.v;
    let end = traj.samples.last().expect("trajectory has samples");
    let lhs_end = lhs_at(end);
    let lhs_start = match prob.domain.kind {
        DomainKind::Ball => 0.0,
        DomainKind::Annulus => lhs_at(&traj.samples[0]),
    };
    Ok((lhs_end - lhs_start - integral).abs() / (1.0 + lhs_end.abs()))
}

/// Closed-form lower bound for the first radius where u falls to η·d:
/// `min{R₂, [(1−η) d p']^{1/p'} (N / f*(d))^{1/p}}`. Defined for d > 1/η.
pub fn r0_lower_bound(prob: &Problem, d: f64) -> Result<f64> {
    let eta = prob.f.eta();
    if !(d > 1.0 / eta) {
        return Err(CoreError::domain(format!(
            "the level-crossing bound needs d > 1/eta = {:.6}, got d = {d}",
            1.0 / eta
        )));
    }
    let p = prob.f.exps.p;
    let pc = prob.f.exps.p_conj;
    let nf = prob.domain.n as f64;
    let fs = prob.f.f_star(d)?;
    let bound = ((1.0 - eta) * d * pc).powf(1.0 / pc) * (nf / fs).powf(1.0 / p);
    Ok(prob.domain.r_outer.min(bound))
}

/// For each datum in an increasing grid (all > 1), the minimum of
/// `u + |u'|` over the arc from the inner boundary to the first zero of u.
/// Divergence of this profile as d grows is the elastic property that rules
/// out bounded subsequences of large-datum trajectories.
pub fn elastic_profile(prob: &Problem, d_grid: &[f64], opts: &ShootOpts) -> Result<Vec<(f64, f64)>> {
    if d_grid.is_empty() {
        return Ok(Vec::new());
    }
    if d_grid[0] <= 1.0 || d_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CoreError::domain(
            "elastic profile needs a strictly increasing grid of data > 1",
        ));
    }
    let mut o = opts.clone();
    o.store_dense = true;
    o.theta_cap = None;
    o.track_theta = false;
    let rows = par_map(d_grid, |&d| -> Result<(f64, f64)> {
        let traj = integrate_cauchy(prob, d, &o)?;
        let mut m = f64::INFINITY;
        for s in traj.samples.iter().take_while(|s| s.r <= traj.r1) {
            m = m.min(s.u + prob.uprime(s).abs());
        }
        if traj.r1 < prob.domain.r_outer {
            let s1 = traj.eval(traj.r1)?;
            m = m.min(s1.u.max(0.0) + prob.uprime(&s1).abs());
        }
        Ok((d, m))
    });
    rows.into_iter().collect()
}

/// Margin report for the a-priori lower bound
/// `R₂^N H(r) + (N/p*) R₂^{N−1} (|u|^p/p + |u'|^p/p') ≥ K₁ f*(d) d r₀^N − K₂`
/// on `[r₀, R₂]`. The theory guarantees the existence of admissible
/// constants, not their values; this evaluates both sides for supplied
/// `K₁, K₂ ≥ 0`. Ball domains only.
#[derive(Debug, Clone, Copy)]
pub struct ElasticLowerBound {
    pub d: f64,
    pub r0: f64,
    pub lhs_min: f64,
    pub rhs: f64,
    /// `lhs_min − rhs`; positive means the bound holds with these constants.
    pub margin: f64,
}

pub fn elastic_lower_bound_diagnostic(
    prob: &Problem,
    traj: &Trajectory,
    k1: f64,
    k2: f64,
) -> Result<ElasticLowerBound> {
    if !prob.domain.is_ball() {
        return Err(CoreError::domain(
            "the elastic lower-bound diagnostic applies to ball domains only",
        ));
    }
    if !(k1 >= 0.0) || !(k2 >= 0.0) {
        return Err(CoreError::domain("the constants K1, K2 must be nonnegative"));
    }
    let eta = prob.f.eta();
    if !(traj.d > 1.0 / eta) {
        return Err(CoreError::domain(format!(
            "the diagnostic needs d > 1/eta = {:.6}, got d = {}",
            1.0 / eta,
            traj.d
        )));
    }
    let r2 = prob.domain.r_outer;
    let r0 = traj.r0.unwrap_or(r2);
    let p = prob.f.exps.p;
    let pc = prob.f.exps.p_conj;
    let nf = prob.domain.n as f64;
    let nm1 = nf - 1.0;
    let np_star = nf / prob.f.exps.p_star; // 0 when p* = ∞
    let mut lhs_min = f64::INFINITY;
    for s in traj.samples.iter().filter(|s| s.r >= r0) {
        let dup = if s.v == 0.0 { 0.0 } else { (s.v.abs() / s.r.powf(nm1)).powf(pc) };
        let lhs = r2.powf(nf) * prob.energy(s)
            + np_star * r2.powf(nm1) * (s.u.abs().powf(p) / p + dup / pc);
        lhs_min = lhs_min.min(lhs);
    }
    let rhs = k1 * prob.f.f_star(traj.d)? * traj.d * r0.powf(nf) - k2;
    Ok(ElasticLowerBound { d: traj.d, r0, lhs_min, rhs, margin: lhs_min - rhs })
}

/// Agreement check between the two winding-angle computations.
#[derive(Debug, Clone, Copy)]
pub struct PolarAgreement {
    /// θ(R₂) from angle unwrapping along the Cartesian trajectory.
    pub theta_direct: f64,
    /// θ(R₂) from integrating the polar (ρ, θ) system itself.
    pub theta_polar: f64,
    /// Smallest ρ seen by the polar integration; the agreement tolerance is
    /// only meaningful when this stays well away from 0.
    pub rho_min: f64,
}

/// Integrates the polar form of the system
/// `ρ' = (p / 2ρ) u' [φ_p(u−1) − r^{(N−1)p'} f̂(u)]`,
/// `θ' = (r^{N−1} / ρ²) [(p−1)|u'|^p + (u−1) f̂(u)]`
/// and compares its final angle with the unwrapped Cartesian angle. The
/// polar system is singular at ρ = 0 and stiff near the axes, so it serves
/// as a cross-check, not as the primary method.
pub fn cross_validate_polar(prob: &Problem, d: f64, opts: &ShootOpts) -> Result<PolarAgreement> {
    if d == 1.0 {
        return Err(CoreError::domain(
            "the polar system is undefined for the equilibrium datum d = 1",
        ));
    }
    let mut o = opts.clone();
    o.track_theta = true;
    o.theta_cap = None;
    o.store_dense = false;
    o.record_every = usize::MAX;
    let traj = integrate_cauchy(prob, d, &o)?;

    let p = prob.f.exps.p;
    let pc = prob.f.exps.p_conj;
    let nf = prob.domain.n as f64;
    let nm1 = nf - 1.0;
    let f = &prob.f;
    let trig = &prob.trig;

    let (r_start, y_start) = match prob.domain.kind {
        DomainKind::Ball => {
            let st = traj.startup.as_ref().expect("ball trajectory has startup");
            let x = d - 1.0;
            let y = st.delta0.powf(nf) * st.fd / nf; // −v at δ₀
            let rho0 = trig.rho2(x, y).sqrt();
            let theta0 = trig
                .angle_of(x, y)
                .ok_or_else(|| CoreError::domain("polar start undefined at the equilibrium"))?;
            (st.delta0, [rho0, theta0])
        }
        DomainKind::Annulus => {
            let rho0 = (d - 1.0).abs().powf(0.5 * p);
            let theta0 = if d > 1.0 { 0.0 } else { trig.pi_p() };
            (prob.domain.r_inner, [rho0, theta0])
        }
    };

    let rhs = move |r: f64, y: &[f64; 2]| -> [f64; 2] {
        let rho = y[0];
        let (c, s) = trig.cos_sin(y[1]);
        let rn = r.powf(nm1);
        let rnp = r.powf(nm1 * pc);
        let u = 1.0 + rho.powf(2.0 / p) * c;
        let v = -rho.powf(2.0 / pc) * s;
        let up = phi_p_inv(p, v / rn);
        let up_p = rho * rho * s.abs().powf(pc) / rnp; // |u'|^p via the polar identity
        let fh = f.f_hat(u);
        [
            0.5 * p / rho * up * (phi_p(p, u - 1.0) - rnp * fh),
            rn / (rho * rho) * ((p - 1.0) * up_p + (u - 1.0) * fh),
        ]
    };

    let mut iopts = IntegrateOpts::<2>::new(opts.rtol, opts.atol);
    iopts.h_max = opts.h_max;
    iopts.store_dense = false;
    let mut rho_min = y_start[0];
    let sol = integrate(&rhs, (r_start, prob.domain.r_outer), y_start, &iopts, |st| {
        rho_min = rho_min.min(st.y1[0]);
        StepControl::Continue
    })?;

    Ok(PolarAgreement {
        theta_direct: traj.theta_end(),
        theta_polar: sol.y_end[1],
        rho_min,
    })
}
