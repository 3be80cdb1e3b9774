//! Deterministic CSV and SVG emission.
//!
//! Every emitter is a pure function from already-computed results to a
//! `String`, so identical inputs produce byte-identical output. Floats are
//! serialized with 17 significant digits in scientific notation, which is
//! exactly enough to round-trip any `f64` bit pattern through text.

use crate::multiplicity::{ScanReport, SolutionRecord};
use crate::shooter::{Problem, Trajectory};

/// Serializes one float with 17 significant digits in scientific notation.
/// `parse::<f64>()` of the result recovers the original bit pattern.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Profile of one trajectory: header `r,u,uprime,v,H,rho,theta`, one row per
/// recorded sample. The angle column is `NaN` when angle tracking was off.
pub fn profile_csv(prob: &Problem, traj: &Trajectory) -> String {
    let mut out = String::from("r,u,uprime,v,H,rho,theta\n");
    for (i, s) in traj.samples.iter().enumerate() {
        let h = traj.energy.get(i).map_or(f64::NAN, |e| e.h);
        let rho = traj.rho.get(i).copied().unwrap_or(f64::NAN);
        let theta = traj.theta.get(i).copied().unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(s.r),
            fmt_f64(s.u),
            fmt_f64(prob.uprime(s)),
            fmt_f64(s.v),
            fmt_f64(h),
            fmt_f64(rho),
            fmt_f64(theta),
        ));
    }
    out
}

/// Solution table: header `d,side,branch,j,residual,umin,umax`, one row per
/// record. An empty record list yields the header alone.
pub fn solutions_csv(records: &[SolutionRecord]) -> String {
    let mut out = String::from("d,side,branch,j,residual,umin,umax\n");
    for rec in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(rec.d),
            rec.side,
            rec.branch,
            rec.j,
            fmt_f64(rec.residual),
            fmt_f64(rec.u_min),
            fmt_f64(rec.u_max),
        ));
    }
    out
}

/// Winding scan: header `d,thetaR2`, one row per grid datum.
pub fn scan_csv(report: &ScanReport) -> String {
    let mut out = String::from("d,thetaR2\n");
    for (d, t) in report.d_grid.iter().zip(&report.theta_at_r2) {
        out.push_str(&format!("{},{}\n", fmt_f64(*d), fmt_f64(*t)));
    }
    out
}

/// Eigenvalue table: header `k,lambda`.
pub fn eigen_csv(pairs: &[(u32, f64)]) -> String {
    let mut out = String::from("k,lambda\n");
    for (k, lambda) in pairs {
        out.push_str(&format!("{},{}\n", k, fmt_f64(*lambda)));
    }
    out
}

/// Points where the winding angle crosses successive half-turn levels
/// `i·π_p`, linearly interpolated between recorded samples in the `(u, v)`
/// plane. Empty when angle tracking was off.
fn half_turn_marks(traj: &Trajectory, pi_p: f64) -> Vec<(f64, f64)> {
    let mut marks = Vec::new();
    if traj.theta.len() != traj.samples.len() || traj.theta.iter().any(|t| !t.is_finite()) {
        return marks;
    }
    let mut level = 1.0;
    // Skip levels already passed at the inner boundary (a datum below the
    // equilibrium starts at θ = π_p).
    if let Some(&t0) = traj.theta.first() {
        while level * pi_p <= t0 {
            level += 1.0;
        }
    }
    for i in 0..traj.theta.len().saturating_sub(1) {
        let (t0, t1) = (traj.theta[i], traj.theta[i + 1]);
        while t0 < level * pi_p && level * pi_p <= t1 {
            let frac = if t1 > t0 { (level * pi_p - t0) / (t1 - t0) } else { 0.0 };
            let (a, b) = (&traj.samples[i], &traj.samples[i + 1]);
            marks.push((a.u + frac * (b.u - a.u), a.v + frac * (b.v - a.v)));
            level += 1.0;
        }
    }
    marks
}

/// Static phase portrait of one trajectory in the `(u, v)` plane: the orbit
/// as a polyline, a crosshair marker at the equilibrium `(1, 0)`, and a dot
/// at each half-turn crossing `θ = i·π_p`. The constant trajectory renders
/// as the equilibrium marker alone.
pub fn phase_portrait_svg(prob: &Problem, traj: &Trajectory) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 40.0;

    let pts: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.u, s.v)).collect();
    let mut u_lo = 1.0f64;
    let mut u_hi = 1.0f64;
    let mut v_lo = 0.0f64;
    let mut v_hi = 0.0f64;
    for &(u, v) in &pts {
        u_lo = u_lo.min(u);
        u_hi = u_hi.max(u);
        v_lo = v_lo.min(v);
        v_hi = v_hi.max(v);
    }
    // Degenerate extents (the constant orbit, or angle-free shots staying on
    // an axis) still get a visible frame around the equilibrium.
    if u_hi - u_lo < 1e-12 {
        u_lo -= 1.0;
        u_hi += 1.0;
    }
    if v_hi - v_lo < 1e-12 {
        v_lo -= 1.0;
        v_hi += 1.0;
    }
    let sx = (W - 2.0 * PAD) / (u_hi - u_lo);
    let sy = (H - 2.0 * PAD) / (v_hi - v_lo);
    let px = |u: f64| PAD + (u - u_lo) * sx;
    let py = |v: f64| H - PAD - (v - v_lo) * sy;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    // Light axes through the equilibrium.
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#cccccc\"/>\n",
        px(u_lo),
        py(0.0),
        px(u_hi),
        py(0.0)
    ));
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#cccccc\"/>\n",
        px(1.0),
        py(v_lo),
        px(1.0),
        py(v_hi)
    ));

    let degenerate = traj.is_constant
        || pts
            .iter()
            .all(|&(u, v)| (u - pts[0].0).abs() < 1e-15 && (v - pts[0].1).abs() < 1e-15);
    if !degenerate {
        let mut path = String::from("M");
        for (i, &(u, v)) in pts.iter().enumerate() {
            if i > 0 {
                path.push_str(" L");
            }
            path.push_str(&format!("{:.3},{:.3}", px(u), py(v)));
        }
        svg.push_str(&format!(
            "<path d=\"{path}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n"
        ));
        for (u, v) in half_turn_marks(traj, prob.trig.pi_p()) {
            svg.push_str(&format!(
                "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3.5\" fill=\"#d62728\"/>\n",
                px(u),
                py(v)
            ));
        }
    }
    // Equilibrium marker at (1, 0): open circle plus crosshair.
    let (cx, cy) = (px(1.0), py(0.0));
    svg.push_str(&format!(
        "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"5\" fill=\"none\" stroke=\"black\" \
         stroke-width=\"1.5\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{:.3}\" y1=\"{cy:.3}\" x2=\"{:.3}\" y2=\"{cy:.3}\" stroke=\"black\"/>\n",
        cx - 9.0,
        cx + 9.0
    ));
    svg.push_str(&format!(
        "<line x1=\"{cx:.3}\" y1=\"{:.3}\" x2=\"{cx:.3}\" y2=\"{:.3}\" stroke=\"black\"/>\n",
        cy - 9.0,
        cy + 9.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#444444\">u</text>\n",
        W - PAD + 14.0,
        py(0.0) + 4.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#444444\">v</text>\n",
        px(1.0) - 4.0,
        PAD - 10.0
    ));
    svg.push_str("</svg>\n");
    svg
}
