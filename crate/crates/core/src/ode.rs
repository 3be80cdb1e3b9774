//! Adaptive embedded Runge-Kutta integration with dense output.
//!
//! Dormand-Prince 5(4) with the classical quartic continuous extension. The
//! integrator exposes every accepted step to a caller callback so higher
//! layers can accumulate winding angles, detect events by bisecting the dense
//! interpolant, and stop early. Steps can optionally be retained to evaluate
//! the solution anywhere in the integration span afterwards.

use crate::error::{CoreError, Result};

// Nodes.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

// Stage coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// Fifth-order weights (also the seventh stage, first-same-as-last).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Embedded error weights (fifth minus fourth order).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseStep<const D: usize> {
    pub r0: f64,
    pub h: f64,
    pub y0: [f64; D],
    pub y1: [f64; D],
    /// Right-hand side at (r0, y0).
    pub f0: [f64; D],
    /// Right-hand side at (r0 + h, y1).
    pub f1: [f64; D],
    cont: [[f64; D]; 5],
}

impl<const D: usize> DenseStep<D> {
    #[inline]
    pub fn r1(&self) -> f64 {
        self.r0 + self.h
    }

    /// Evaluates the quartic interpolant. `r` is clamped to the step span.
    pub fn eval(&self, r: f64) -> [f64; D] {
        let t = ((r - self.r0) / self.h).clamp(0.0, 1.0);
        let t1 = 1.0 - t;
        let mut out = [0.0; D];
        for i in 0..D {
            out[i] = self.cont[0][i]
                + t * (self.cont[1][i]
                    + t1 * (self.cont[2][i] + t * (self.cont[3][i] + t1 * self.cont[4][i])));
        }
        out
    }
}

/// Retained integration output.
#[derive(Debug, Clone)]
pub struct DenseSolution<const D: usize> {
    /// Accepted steps in increasing r; empty when `store_dense` was off.
    pub steps: Vec<DenseStep<D>>,
    pub r_start: f64,
    pub r_end: f64,
    pub y_end: [f64; D],
    pub f_end: [f64; D],
    pub n_accepted: usize,
    pub n_rejected: usize,
    /// True when the step callback requested termination before the span end.
    pub stopped_early: bool,
}

impl<const D: usize> DenseSolution<D> {
    /// Evaluates the stored interpolant; clamps outside the integrated span.
    /// Panics if the solution was produced without dense storage.
    pub fn eval(&self, r: f64) -> [f64; D] {
        assert!(
            !self.steps.is_empty(),
            "dense evaluation requested on a solution integrated without dense storage"
        );
        let idx = self
            .steps
            .partition_point(|s| s.r1() < r)
            .min(self.steps.len() - 1);
        self.steps[idx].eval(r)
    }
}

/// Step-callback verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    /// Stop after this step; the solution reports `stopped_early`.
    Stop,
}

/// Error-norm policy.
#[derive(Debug, Clone, Copy)]
pub enum ErrorNorm {
    /// Scaled RMS over all components.
    Standard,
    /// When the named component changes sign across a step, only that
    /// component's error estimate drives step control. Used for systems where
    /// an odd power map with exponent < 1 acts on that component: its inverse
    /// derivative blows up on the axis and floods the other components'
    /// estimates while their true error stays benign.
    AxisGuarded { component: usize },
}

/// Integration options.
#[derive(Debug, Clone)]
pub struct IntegrateOpts<const D: usize> {
    pub rtol: f64,
    pub atol: [f64; D],
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
    pub max_steps: usize,
    pub error_norm: ErrorNorm,
    /// Retain every accepted step for later dense evaluation.
    pub store_dense: bool,
}

impl<const D: usize> IntegrateOpts<D> {
    pub fn new(rtol: f64, atol: f64) -> Self {
        IntegrateOpts {
            rtol,
            atol: [atol; D],
            h_init: None,
            h_max: None,
            max_steps: 4_000_000,
            error_norm: ErrorNorm::Standard,
            store_dense: true,
        }
    }
}

impl<const D: usize> Default for IntegrateOpts<D> {
    fn default() -> Self {
        Self::new(1e-10, 1e-12)
    }
}

#[inline]
fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for i in 0..D {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Integrates `rhs` over `span`, invoking `on_step` after every accepted step.
///
/// The span must be increasing. On step-size collapse or step-count
/// exhaustion the error carries the last accepted state.
pub fn integrate<const D: usize>(
    rhs: &dyn Fn(f64, &[f64; D]) -> [f64; D],
    span: (f64, f64),
    y_start: [f64; D],
    opts: &IntegrateOpts<D>,
    mut on_step: impl FnMut(&DenseStep<D>) -> StepControl,
) -> Result<DenseSolution<D>> {
    let (r_start, r_end) = span;
    if !(r_end > r_start) || !r_start.is_finite() || !r_end.is_finite() {
        return Err(CoreError::domain(format!(
            "integration span must be finite and increasing, got [{r_start}, {r_end}]"
        )));
    }
    if !(opts.rtol > 0.0) || opts.atol.iter().any(|a| !(*a >= 0.0)) {
        return Err(CoreError::domain("tolerances must be positive"));
    }

    let span_len = r_end - r_start;
    let h_max = opts.h_max.unwrap_or(span_len).min(span_len);

    let mut r = r_start;
    let mut y = y_start;
    let mut k1 = rhs(r, &y);
    if k1.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::numeric("right-hand side not finite at start", r, &y));
    }

    let mut h = match opts.h_init {
        Some(h0) => h0.min(h_max),
        None => initial_step(rhs, r, &y, &k1, opts, h_max),
    };

    let mut sol = DenseSolution {
        steps: Vec::new(),
        r_start,
        r_end: r_start,
        y_end: y,
        f_end: k1,
        n_accepted: 0,
        n_rejected: 0,
        stopped_early: false,
    };

    let mut facmax = 5.0;
    let mut n_total = 0usize;

    while r < r_end {
        if n_total >= opts.max_steps {
            return Err(CoreError::numeric(
                format!("step budget exhausted after {} steps", opts.max_steps),
                r,
                &y,
            ));
        }
        n_total += 1;

        h = h.min(h_max).min(r_end - r);
        // A step is only hopeless once it can no longer advance the position
        // in f64. Transiently tiny steps are legitimate near a singular inner
        // boundary (stiff startups take steps far below any span-relative
        // floor there); runaway stalls are bounded by the step budget above.
        if r + h == r {
            return Err(CoreError::numeric("step size collapse", r, &y));
        }

        let k2 = rhs(r + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(r + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(r + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            r + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            r + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y1 = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = rhs(r + h, &y1);

        if y1.iter().any(|v| !v.is_finite()) || k7.iter().any(|v| !v.is_finite()) {
            // Treat non-finite trial states as a failed step and retry smaller.
            sol.n_rejected += 1;
            h *= 0.1;
            facmax = 1.0;
            continue;
        }

        // Scaled error estimate.
        let mut err_all = 0.0;
        let mut err_comp = [0.0; D];
        for i in 0..D {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol[i] + opts.rtol * y[i].abs().max(y1[i].abs());
            let q = e / sc;
            err_comp[i] = q.abs();
            err_all += q * q;
        }
        let mut err = (err_all / D as f64).sqrt();
        if let ErrorNorm::AxisGuarded { component } = opts.error_norm {
            if y[component] * y1[component] <= 0.0 {
                err = err_comp[component];
            }
        }

        if !err.is_finite() {
            sol.n_rejected += 1;
            h *= 0.1;
            facmax = 1.0;
            continue;
        }

        if err <= 1.0 {
            // Accept; build the continuous extension.
            let ydiff = {
                let mut d = [0.0; D];
                for i in 0..D {
                    d[i] = y1[i] - y[i];
                }
                d
            };
            let mut cont = [[0.0; D]; 5];
            for i in 0..D {
                let bspl = h * k1[i] - ydiff[i];
                cont[0][i] = y[i];
                cont[1][i] = ydiff[i];
                cont[2][i] = bspl;
                cont[3][i] = ydiff[i] - h * k7[i] - bspl;
                cont[4][i] = h
                    * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let step = DenseStep {
                r0: r,
                h,
                y0: y,
                y1,
                f0: k1,
                f1: k7,
                cont,
            };

            r += h;
            y = y1;
            k1 = k7;
            sol.n_accepted += 1;
            sol.r_end = r;
            sol.y_end = y;
            sol.f_end = k7;

            let verdict = on_step(&step);
            if opts.store_dense {
                sol.steps.push(step);
            }
            if verdict == StepControl::Stop {
                sol.stopped_early = true;
                return Ok(sol);
            }

            let fac = (1.0 / err).powf(0.2).clamp(0.2, facmax) * 0.9;
            h *= fac.max(0.2);
            facmax = 5.0;
        } else {
            sol.n_rejected += 1;
            let fac = (1.0 / err).powf(0.2).clamp(0.2, 1.0) * 0.9;
            h *= fac.max(0.1);
            facmax = 1.0;
        }
    }

    Ok(sol)
}

/// Convenience wrapper: integrate the whole span, keep dense output.
pub fn integrate_collect<const D: usize>(
    rhs: &dyn Fn(f64, &[f64; D]) -> [f64; D],
    span: (f64, f64),
    y_start: [f64; D],
    opts: &IntegrateOpts<D>,
) -> Result<DenseSolution<D>> {
    integrate(rhs, span, y_start, opts, |_| StepControl::Continue)
}

/// Classical starting-step heuristic.
fn initial_step<const D: usize>(
    rhs: &dyn Fn(f64, &[f64; D]) -> [f64; D],
    r: f64,
    y: &[f64; D],
    f0: &[f64; D],
    opts: &IntegrateOpts<D>,
    h_max: f64,
) -> f64 {
    let sc = |i: usize, v: f64| opts.atol[i] + opts.rtol * v.abs();
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..D {
        d0 += (y[i] / sc(i, y[i])).powi(2);
        d1 += (f0[i] / sc(i, y[i])).powi(2);
    }
    d0 = (d0 / D as f64).sqrt();
    d1 = (d1 / D as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(h_max);

    let y1 = axpy(y, h0, &[(1.0, f0)]);
    let f1 = rhs(r + h0, &y1);
    let mut d2 = 0.0;
    for i in 0..D {
        d2 += ((f1[i] - f0[i]) / sc(i, y[i])).powi(2);
    }
    d2 = (d2 / D as f64).sqrt() / h0;

    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    // Floor the proposal: states with a zero component and a large derivative
    // (scale set by atol alone) poison the ratio heuristic toward absurdly
    // small steps. An overestimate self-corrects through a few rejections.
    (100.0 * h0).min(h1).max(1e-6 * h_max).min(h_max)
}

/// Locates a zero of `g(r, y(r))` inside one dense step by bisection.
///
/// Requires a sign change of `g` between the step ends (checked by caller);
/// returns the refined abscissa with interval width below `tol`.
pub fn locate_zero<const D: usize>(
    step: &DenseStep<D>,
    g: &dyn Fn(f64, &[f64; D]) -> f64,
    tol: f64,
) -> f64 {
    let mut a = step.r0;
    let mut b = step.r1();
    let mut ga = g(a, &step.y0);
    if ga == 0.0 {
        return a;
    }
    let gb = g(b, &step.y1);
    if gb == 0.0 {
        return b;
    }
    debug_assert!(ga * gb < 0.0, "locate_zero requires a bracketing step");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= tol || m == a || m == b {
            return m;
        }
        let gm = g(m, &step.eval(m));
        if gm == 0.0 {
            return m;
        }
        if ga * gm < 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
    }
    0.5 * (a + b)
}
