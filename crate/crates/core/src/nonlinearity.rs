//! The nonlinearity f and its derived objects.
//!
//! A [`Nonlinearity`] bundles the exponent data (p, N) with either the
//! prototype power difference
//!
//! ```text
//!   f(s) = s^{q-1} - s^{r-1},      p <= r < q,
//! ```
//!
//! or a user-sampled table interpolated by a shape-preserving cubic. Derived
//! objects exposed here:
//!
//! - `f_hat`: the truncation with f̂(s) = 0 for s < 0, used by the shooter so
//!   trajectories ignore the negative half-plane;
//! - `big_f`: the primitive F(s) = ∫₁^s f(σ) dσ (closed form for the
//!   prototype, exact piecewise-cubic integral for sampled data);
//! - `big_f_hat`: the primitive of f̂ normalized the same way, constant on
//!   s ≤ 0; this is the potential term of the shooting energy;
//! - `f_star`: the smallest non-decreasing majorant of f on [1, ∞),
//!   f*(s) = max_{σ∈[1,s]} f(σ), with exact segment maxima for sampled data;
//! - `f_infty`: lim_{s→∞} F(s);
//! - `c1`: the equilibrium strength C₁ = lim_{s→1} f(s)/φ_p(s-1), estimated
//!   from both sides with Aitken acceleration (a finite-arithmetic convention
//!   maps clear divergence to +∞);
//! - `eta`: the threshold η ∈ (0,1) entering both the first-exit radius r₀
//!   and the superlinear growth quotient; either supplied or found once by
//!   golden-section search and cached.
//!
//! [`Nonlinearity::check_hypotheses`] probes the standing structural
//! assumptions (equilibria and signs, behavior at 0⁺, and the growth condition
//! selected by [`GrowthClass`]) on a grid and reports per-hypothesis statuses;
//! limits are not machine-decidable, so `VerifiedOnGrid` is the strongest
//! possible claim and every `Violated` carries a concrete witness point.

use std::sync::OnceLock;

use crate::error::{CoreError, Result};
use crate::pchip::Pchip;
use crate::ptrig::{phi_p, PExponents};
use crate::solve1d::golden_min;

/// Which growth regime at s → ∞ the problem statement relies on: balls need
/// either the (p-1)-sublinear bound or the subcritical quotient, annuli need
/// no growth restriction at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Sublinear,
    Subcritical,
    AnnulusUnrestricted,
}

#[derive(Debug)]
enum FKind {
    Prototype {
        q: f64,
        r: f64,
    },
    Sampled {
        interp: Pchip,
        /// Exact integral of the interpolant over [0, 1], so F(s) can be
        /// formed as a difference of prefix integrals.
        int_to_one: f64,
    },
}

/// A nonlinearity f with one positive equilibrium at s = 1, together with the
/// exponent data of the ambient problem. Immutable after construction; all
/// evaluations are pure, so shared references can cross threads freely.
#[derive(Debug)]
pub struct Nonlinearity {
    pub exps: PExponents,
    kind: FKind,
    eta_given: Option<f64>,
    eta_cache: OnceLock<f64>,
    pub growth_class: GrowthClass,
}

impl Nonlinearity {
    /// Prototype power difference f(s) = s^{q-1} - s^{r-1} with p ≤ r < q.
    pub fn prototype(
        p: f64,
        n: u32,
        q: f64,
        r: f64,
        eta: Option<f64>,
        growth_class: GrowthClass,
    ) -> Result<Self> {
        let exps = PExponents::new(p, n)?;
        if !q.is_finite() || !r.is_finite() || r < p || q <= r {
            return Err(CoreError::domain(format!(
                "prototype exponents must satisfy p <= r < q, got p = {p}, r = {r}, q = {q}"
            )));
        }
        validate_eta(eta)?;
        Ok(Nonlinearity {
            exps,
            kind: FKind::Prototype { q, r },
            eta_given: eta,
            eta_cache: OnceLock::new(),
            growth_class,
        })
    }

    /// User nonlinearity from samples (s_i, f(s_i)). The table must start at
    /// s = 0 with f(0) = 0 and contain the equilibrium knot s = 1 with
    /// f(1) = 0 exactly; otherwise the interpolated problem would not have
    /// u ≡ 1 as a constant solution and the phase-plane machinery around
    /// (1, 0) would silently target the wrong center. Values beyond the last
    /// sample are extended as a constant.
    pub fn from_samples(
        p: f64,
        n: u32,
        s: &[f64],
        f: &[f64],
        eta: Option<f64>,
        growth_class: GrowthClass,
    ) -> Result<Self> {
        let exps = PExponents::new(p, n)?;
        validate_eta(eta)?;
        let interp = Pchip::new(s, f)?;
        if s[0] != 0.0 || f[0] != 0.0 {
            return Err(CoreError::domain(
                "sample table must start at s = 0 with f(0) = 0",
            ));
        }
        match s.iter().position(|&si| si == 1.0) {
            Some(i) if f[i] == 0.0 => {}
            _ => {
                return Err(CoreError::domain(
                    "sample table must contain the equilibrium knot s = 1 with f(1) = 0",
                ))
            }
        }
        let int_to_one = interp.integral(1.0);
        Ok(Nonlinearity {
            exps,
            kind: FKind::Sampled { interp, int_to_one },
            eta_given: eta,
            eta_cache: OnceLock::new(),
            growth_class,
        })
    }

    /// User nonlinearity from a closed-form callable, represented internally
    /// by sampling it on [0, s_max]: a dense uniform band through the
    /// equilibria plus a geometric tail. The callable must vanish at 0 and 1.
    pub fn from_fn(
        p: f64,
        n: u32,
        f: impl Fn(f64) -> f64,
        s_max: f64,
        eta: Option<f64>,
        growth_class: GrowthClass,
    ) -> Result<Self> {
        if !(s_max > 2.0) {
            return Err(CoreError::domain("sampling range must extend past s = 2"));
        }
        let mut s: Vec<f64> = (0..=4000).map(|i| 2.0 * i as f64 / 4000.0).collect();
        let tail_n = 2000;
        let ratio = (s_max / 2.0).powf(1.0 / tail_n as f64);
        let mut v = 2.0;
        for _ in 0..tail_n {
            v *= ratio;
            s.push(v);
        }
        let y: Vec<f64> = s.iter().map(|&si| f(si)).collect();
        Self::from_samples(p, n, &s, &y, eta, growth_class)
    }

    #[inline]
    fn f_raw(&self, s: f64) -> f64 {
        match &self.kind {
            FKind::Prototype { q, r } => s.powf(q - 1.0) - s.powf(r - 1.0),
            FKind::Sampled { interp, .. } => interp.eval(s),
        }
    }

    /// f(s) on its natural domain s ≥ 0.
    pub fn f(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(CoreError::domain(format!(
                "f is defined on [0, ∞); for phase-plane use at s = {s} call f_hat"
            )));
        }
        Ok(self.f_raw(s))
    }

    /// The truncation f̂: equal to f on [0, ∞), identically 0 on (-∞, 0).
    #[inline]
    pub fn f_hat(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            self.f_raw(s)
        }
    }

    #[inline]
    fn big_f_raw(&self, s: f64) -> f64 {
        match &self.kind {
            FKind::Prototype { q, r } => {
                s.powf(*q) / q - s.powf(*r) / r - (1.0 / q - 1.0 / r)
            }
            FKind::Sampled { interp, int_to_one } => interp.integral(s) - int_to_one,
        }
    }

    /// F(s) = ∫₁^s f(σ) dσ for s ≥ 0. Positive away from s = 1.
    pub fn big_f(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(CoreError::domain(
                "F is defined on [0, ∞); use big_f_hat on the whole line",
            ));
        }
        Ok(self.big_f_raw(s))
    }

    /// F̂(s) = ∫₁^s f̂(σ) dσ: agrees with F on s ≥ 0 and freezes at F(0) for
    /// s < 0. This is the potential entering the shooting energy.
    #[inline]
    pub fn big_f_hat(&self, s: f64) -> f64 {
        self.big_f_raw(s.max(0.0))
    }

    /// The monotone envelope f*(s) = max_{σ∈[1,s]} f(σ), s ≥ 1.
    pub fn f_star(&self, s: f64) -> Result<f64> {
        if !(s >= 1.0) {
            return Err(CoreError::domain(format!(
                "the envelope f* is defined for s >= 1, got {s}"
            )));
        }
        Ok(match &self.kind {
            // The prototype is increasing on [1, ∞) (q > r), so the envelope
            // of f is f itself.
            FKind::Prototype { .. } => self.f_raw(s),
            FKind::Sampled { interp, .. } => interp.max_on(1.0, s).max(0.0),
        })
    }

    /// lim_{s→∞} F(s): +∞ whenever f has a positive tail (always true for the
    /// prototype), the finite plateau value when a sampled f ends at 0.
    pub fn f_infty(&self) -> f64 {
        match &self.kind {
            FKind::Prototype { .. } => f64::INFINITY,
            FKind::Sampled { interp, .. } => {
                let tail = interp.y_last();
                if tail > 0.0 {
                    f64::INFINITY
                } else if tail < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    self.big_f_raw(interp.x_last())
                }
            }
        }
    }

    /// The equilibrium strength C₁ = lim_{s→1} f(s) / (|s-1|^{p-2}(s-1)).
    ///
    /// Samples the quotient from both sides at h = 0.1·4^{-j}, truncates each
    /// sequence where rounding noise stalls its convergence, and accelerates
    /// with Aitken's Δ². Clear divergence (both sides growing, magnitude past
    /// 10¹⁰) is reported as +∞ by convention; side estimates that disagree
    /// beyond `tol` give an inconclusive error.
    pub fn c1(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(CoreError::domain("tolerance must be positive"));
        }
        let p = self.exps.p;
        let mut q_plus = Vec::new();
        let mut q_minus = Vec::new();
        for j in 0..=18 {
            let h = 0.1 * 4.0f64.powi(-j);
            let fp = self.f_raw(1.0 + h);
            let fm = self.f_raw(1.0 - h);
            // Below ~1e-13 the values are dominated by cancellation noise.
            if fp.abs() < 1e-13 || fm.abs() < 1e-13 {
                break;
            }
            q_plus.push(fp / phi_p(p, h));
            q_minus.push(fm / phi_p(p, -h));
        }
        if q_plus.len() < 4 {
            return Err(CoreError::inconclusive(
                "equilibrium quotient vanished into rounding noise near s = 1",
            ));
        }

        let growing = |qs: &[f64]| {
            let n = qs.len();
            qs[n - 1].abs() > qs[n - 2].abs() && qs[n - 2].abs() > qs[n - 3].abs()
        };
        let last_mag = q_plus.last().unwrap().abs().max(q_minus.last().unwrap().abs());
        if last_mag > 1e10 && growing(&q_plus) && growing(&q_minus) {
            if *q_plus.last().unwrap() > 0.0 && *q_minus.last().unwrap() > 0.0 {
                return Ok(f64::INFINITY);
            }
            return Err(CoreError::inconclusive(
                "equilibrium quotient diverges with a negative sign",
            ));
        }

        let refine = |qs: &[f64]| -> Result<f64> {
            // Truncate at the smallest successive increment: beyond it the
            // sequence is walking in rounding noise rather than converging.
            let mut cut = qs.len();
            let mut best = f64::INFINITY;
            for i in 1..qs.len() {
                let inc = (qs[i] - qs[i - 1]).abs();
                if inc < best {
                    best = inc;
                    cut = i + 1;
                }
            }
            let qs = &qs[..cut];
            let n = qs.len();
            if n < 3 {
                return Err(CoreError::inconclusive(
                    "too few usable equilibrium quotient samples",
                ));
            }
            let (x0, x1, x2) = (qs[n - 3], qs[n - 2], qs[n - 1]);
            if (x2 - x1).abs() > (x1 - x0).abs() && (x2 - x1).abs() > tol.max(1e-12) {
                return Err(CoreError::inconclusive(
                    "equilibrium quotient still growing; no finite limit resolved",
                ));
            }
            let d2 = (x2 - x1) - (x1 - x0);
            Ok(if d2 == 0.0 { x2 } else { x2 - (x2 - x1) * (x2 - x1) / d2 })
        };
        let a_plus = refine(&q_plus)?;
        let a_minus = refine(&q_minus)?;
        let scale = 1.0f64.max(a_plus.abs()).max(a_minus.abs());
        if (a_plus - a_minus).abs() <= tol * scale {
            Ok(0.5 * (a_plus + a_minus))
        } else {
            Err(CoreError::inconclusive(format!(
                "two-sided equilibrium estimates disagree: {a_plus:.6e} vs {a_minus:.6e}"
            )))
        }
    }

    /// The threshold η ∈ (0, 1): the supplied value if any, otherwise the
    /// minimizer of the tail growth quotient sup_s f*(s)s / F(ηs), found once
    /// by golden-section search and cached.
    pub fn eta(&self) -> f64 {
        if let Some(e) = self.eta_given {
            return e;
        }
        *self.eta_cache.get_or_init(|| match &self.kind {
            // The prototype's tail quotient has the exact limit q/η^q, so the
            // search minimizes the limit itself instead of a grid surrogate.
            FKind::Prototype { q, .. } => {
                golden_min(&mut |eta: f64| q / eta.powf(*q), 0.01, 0.99, 1e-6, 200).0
            }
            FKind::Sampled { .. } => {
                let tail = log_range(1e4, 1e6, 33);
                let mut objective = |eta: f64| {
                    tail.iter()
                        .map(|&s| self.growth_quotient(s, eta))
                        .fold(f64::NEG_INFINITY, f64::max)
                };
                golden_min(&mut objective, 0.01, 0.99, 1e-6, 200).0
            }
        })
    }

    /// The quotient f*(s)·s / F(η s) whose tail limsup the growth condition
    /// bounds by p*.
    pub fn growth_quotient(&self, s: f64, eta: f64) -> f64 {
        let num = self.f_star(s).expect("growth quotient needs s >= 1") * s;
        let den = self.big_f_raw(eta * s);
        num / den
    }

    /// Grid-based probe of the standing hypotheses. Never fails: undecidable
    /// situations surface as `Inconclusive` statuses.
    pub fn check_hypotheses(&self, grid: &ProbeGrid) -> HypothesisReport {
        let f_eq = self.check_equilibria(grid);
        let f_zero = self.check_zero_limit(grid);
        let (f_subl, sublinear_bound) = match self.growth_class {
            GrowthClass::Sublinear => self.check_sublinear(grid),
            _ => (HypStatus::NotApplicable, None),
        };
        let (f_subc, subcrit_tail_quotient, eta_used) = match self.growth_class {
            GrowthClass::Subcritical => self.check_subcritical(grid),
            _ => (HypStatus::NotApplicable, None, None),
        };
        let subcrit_fit = if f_subc == HypStatus::VerifiedOnGrid && self.exps.p_star.is_finite()
        {
            self.fit_subcritical(grid)
        } else {
            None
        };
        HypothesisReport {
            f_eq,
            f_zero,
            f_subl,
            f_subc,
            sublinear_bound,
            subcrit_tail_quotient,
            eta_used,
            subcrit_fit,
        }
    }

    fn check_equilibria(&self, grid: &ProbeGrid) -> HypStatus {
        if self.f_raw(0.0).abs() > 1e-12 {
            return HypStatus::Violated { witness: 0.0 };
        }
        if self.f_raw(1.0).abs() > 1e-12 {
            return HypStatus::Violated { witness: 1.0 };
        }
        for &s in &grid.s {
            let fv = self.f_raw(s);
            // Near the zeros of f the sign is not certifiable in floating
            // point; skip values at rounding scale.
            if fv.abs() < 1e-12 {
                continue;
            }
            if s < 1.0 && fv > 0.0 {
                return HypStatus::Violated { witness: s };
            }
            if s > 1.0 && fv < 0.0 {
                return HypStatus::Violated { witness: s };
            }
        }
        HypStatus::VerifiedOnGrid
    }

    fn check_zero_limit(&self, grid: &ProbeGrid) -> HypStatus {
        let p = self.exps.p;
        let small: Vec<f64> = grid.s.iter().copied().filter(|&s| s <= 0.5).collect();
        if small.len() < 4 {
            return HypStatus::Inconclusive;
        }
        let quot: Vec<f64> = small.iter().map(|&s| self.f_raw(s) / s.powf(p - 1.0)).collect();
        let low = quot.iter().cloned().fold(f64::INFINITY, f64::min);
        if low >= -1e10 {
            // Bounded below on the whole probe range.
            let head = &quot[..quot.len().min(8)];
            let flips = head
                .windows(2)
                .map(|w| w[1] - w[0])
                .collect::<Vec<_>>()
                .windows(2)
                .filter(|d| d[0] * d[1] < 0.0 && d[0].abs() > 1e-9 && d[1].abs() > 1e-9)
                .count();
            if flips >= 3 {
                return HypStatus::Inconclusive;
            }
            return HypStatus::VerifiedOnGrid;
        }
        // Unboundedly negative on the grid: decide between a clean dive and
        // oscillation by the monotonicity of the smallest samples.
        let descending = quot.windows(2).take(4).all(|w| w[0] <= w[1]);
        if descending {
            HypStatus::Violated { witness: small[0] }
        } else {
            HypStatus::Inconclusive
        }
    }

    fn tail_of<'g>(&self, grid: &'g ProbeGrid) -> &'g [f64] {
        let s_max = *grid.s.last().unwrap();
        let start = grid.s.partition_point(|&s| s < s_max / 100.0);
        &grid.s[start..]
    }

    fn check_sublinear(&self, grid: &ProbeGrid) -> (HypStatus, Option<f64>) {
        let p = self.exps.p;
        let tail = self.tail_of(grid);
        let quot: Vec<f64> = tail.iter().map(|&s| self.f_raw(s) / s.powf(p - 1.0)).collect();
        let (m_idx, m_val) = argmax(&quot);
        let half = quot.len() / 2;
        let head_max = quot[..half].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tail_max = quot[half..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if tail_max > 1e6 && tail_max > 2.0 * head_max.max(1.0) {
            return (HypStatus::Violated { witness: tail[m_idx] }, None);
        }
        if tail_max > 1.2 * head_max.abs().max(1e-12) + 1e-12 && tail_max > head_max {
            // Still creeping upward across the last decades: not decidable.
            return (HypStatus::Inconclusive, Some(m_val));
        }
        (HypStatus::VerifiedOnGrid, Some(m_val))
    }

    fn check_subcritical(&self, grid: &ProbeGrid) -> (HypStatus, Option<f64>, Option<f64>) {
        let p = self.exps.p;
        let p_star = self.exps.p_star;
        let eta = self.eta();
        let tail = self.tail_of(grid);
        let mut worst = f64::NEG_INFINITY;
        let mut worst_s = tail[0];
        for &s in tail {
            let q = self.growth_quotient(s, eta);
            if q > worst {
                worst = q;
                worst_s = s;
            }
        }

        if let FKind::Prototype { q, r: _ } = &self.kind {
            // Closed forms: f/s^{p-1} ~ s^{q-p} diverges (q > r ≥ p), and the
            // growth quotient has the exact limit q/η^q. Finite-s grid values
            // approach that limit from above at rate s^{r-q}, which is far too
            // slow to sample when q - r is small, so the grid is only used for
            // the violation witness here.
            let limit = q / eta.powf(*q);
            return if limit < p_star {
                (HypStatus::VerifiedOnGrid, Some(limit), Some(eta))
            } else {
                let witness = if worst >= p_star { worst_s } else { *tail.last().unwrap() };
                (HypStatus::Violated { witness }, Some(worst.max(limit)), Some(eta))
            };
        }

        // Sampled data: part (a) — f must NOT be (p-1)-sublinear, i.e. the
        // quotient f/s^{p-1} has to blow up; probe its log-log slope.
        let q_first = self.f_raw(tail[0]) / tail[0].powf(p - 1.0);
        let q_last = {
            let s = *tail.last().unwrap();
            self.f_raw(s) / s.powf(p - 1.0)
        };
        let slope = (q_last.max(1e-300) / q_first.max(1e-300)).ln()
            / (tail.last().unwrap() / tail[0]).ln();
        let part_a_ok = q_last > q_first && slope > 0.02 && q_last > 1.0;

        // Part (b): the growth quotient stays below p* on the tail.
        if worst >= p_star {
            return (
                HypStatus::Violated { witness: worst_s },
                Some(worst),
                Some(eta),
            );
        }
        if part_a_ok {
            (HypStatus::VerifiedOnGrid, Some(worst), Some(eta))
        } else {
            (HypStatus::Inconclusive, Some(worst), Some(eta))
        }
    }

    /// Fits the explicit subcritical growth bound f(s) ≤ C_ε s^{p*-1-ε} for
    /// s > s_ε implied by the growth condition (only meaningful for p < N).
    fn fit_subcritical(&self, grid: &ProbeGrid) -> Option<SubcritFit> {
        let p_star = self.exps.p_star;
        let tail = self.tail_of(grid);
        let q_inf = match &self.kind {
            // limsup f(s)s/F(s) = q exactly for the prototype.
            FKind::Prototype { q, .. } => *q,
            FKind::Sampled { .. } => tail
                .iter()
                .map(|&s| self.f_raw(s) * s / self.big_f_raw(s))
                .fold(f64::NEG_INFINITY, f64::max),
        };
        if !(q_inf < p_star) {
            return None;
        }
        let epsilon = 0.5 * (p_star - q_inf);
        // First grid point past which the η=1 quotient stays under p*-ε.
        let quot: Vec<f64> = grid
            .s
            .iter()
            .map(|&s| {
                if s > 1.5 {
                    self.f_raw(s) * s / self.big_f_raw(s)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let mut s_eps = *grid.s.last().unwrap();
        for i in (0..grid.s.len()).rev() {
            if quot[i] > p_star - epsilon {
                break;
            }
            s_eps = grid.s[i];
        }
        let c_eps = grid
            .s
            .iter()
            .filter(|&&s| s >= s_eps)
            .map(|&s| self.f_raw(s) / s.powf(p_star - 1.0 - epsilon))
            .fold(0.0f64, f64::max);
        Some(SubcritFit { epsilon, c_eps, s_eps })
    }
}

fn validate_eta(eta: Option<f64>) -> Result<()> {
    if let Some(e) = eta {
        if !(e > 0.0 && e < 1.0) {
            return Err(CoreError::domain(format!(
                "eta must lie in (0, 1), got {e}"
            )));
        }
    }
    Ok(())
}

fn argmax(v: &[f64]) -> (usize, f64) {
    let mut idx = 0;
    let mut val = f64::NEG_INFINITY;
    for (i, &x) in v.iter().enumerate() {
        if x > val {
            val = x;
            idx = i;
        }
    }
    (idx, val)
}

fn log_range(a: f64, b: f64, n: usize) -> Vec<f64> {
    let la = a.ln();
    let lb = b.ln();
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Ascending positive sample points on which hypotheses are probed.
#[derive(Debug, Clone)]
pub struct ProbeGrid {
    pub s: Vec<f64>,
}

impl ProbeGrid {
    /// Geometric grid on [s_min, s_max].
    pub fn geometric(s_min: f64, s_max: f64, n: usize) -> Result<Self> {
        if !(s_min > 0.0 && s_max > s_min && n >= 2) {
            return Err(CoreError::domain("geometric grid needs 0 < s_min < s_max, n >= 2"));
        }
        Ok(ProbeGrid { s: log_range(s_min, s_max, n) })
    }

    /// Default probe grid: a uniform band through both equilibria merged with
    /// a geometric sweep up to `s_max` (which must reach at least 10³).
    pub fn standard(s_max: f64) -> Result<Self> {
        if !(s_max >= 1e3) {
            return Err(CoreError::domain("probe grid must extend to s_max >= 1e3"));
        }
        let mut s: Vec<f64> = (1..=1000).map(|i| 2.0 * i as f64 / 1000.0).collect();
        s.extend(log_range(1e-6, s_max, 800));
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * a.abs());
        Ok(ProbeGrid { s })
    }
}

/// Outcome of probing one hypothesis on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HypStatus {
    VerifiedOnGrid,
    Violated { witness: f64 },
    Inconclusive,
    NotApplicable,
}

/// The explicit growth bound f(s) ≤ C_ε s^{p*-1-ε} for s > s_ε.
#[derive(Debug, Clone, Copy)]
pub struct SubcritFit {
    pub epsilon: f64,
    pub c_eps: f64,
    pub s_eps: f64,
}

/// Per-hypothesis probe outcomes plus the numbers backing them.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    /// Equilibria and signs: f(0) = f(1) = 0, f < 0 on (0,1), f > 0 after 1.
    pub f_eq: HypStatus,
    /// Lower-boundedness of f(s)/s^{p-1} as s → 0⁺.
    pub f_zero: HypStatus,
    /// The (p-1)-sublinear tail bound (ball, sublinear regime).
    pub f_subl: HypStatus,
    /// The subcritical growth quotient (ball, superlinear regime).
    pub f_subc: HypStatus,
    /// Tail bound M for the sublinear quotient, when probed.
    pub sublinear_bound: Option<f64>,
    /// Largest observed tail value of f*(s)s / F(ηs), when probed.
    pub subcrit_tail_quotient: Option<f64>,
    /// The η the subcritical probe used (supplied or searched).
    pub eta_used: Option<f64>,
    /// Explicit subcritical fit, when p < N and the growth probe verified.
    pub subcrit_fit: Option<SubcritFit>,
}
