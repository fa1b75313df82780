//! Forward shooting for the radial system u'' + u'/r = -s u,
//! s'' + s'/r = -u^2, and the stable completion of the decaying branch.
//!
//! The shifted field s = w - a absorbs the additive freedom of the log
//! potential (constants are harmonic), leaving one shooting parameter
//! beta = s(0) at fixed central height alpha = u(0). Forward integration
//! can track the separatrix only down to u ~ sqrt(eps_beta) * alpha, so the
//! far field is completed by a backward Riccati sweep of v = u'/u (stable
//! in that direction) with the potential continued through its own ODE.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::interp::CubicHermite;
use std::sync::Arc;

/// Target per-substep phase rotation of the RK4 integrator; keeps the
/// accumulated trajectory error near 1e-9 so that beta* is stable to
/// ~1e-8 under grid refinement.
const STEP_CAP: f64 = 0.008;

/// Magnitude at which a trajectory is declared numerically divergent.
const OVERFLOW_GUARD: f64 = 1e100;

/// Fraction of alpha at which the forward sweep hands over to the
/// backward Riccati completion. Forward contamination from the shooting
/// bracket (width eps) scales like (alpha/u)^2 eps, so 1e-3 keeps the
/// matched amplitude accurate to ~1e-7 for eps = 1e-13.
const SWITCH_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// u crossed zero at r_event.
    Overshoot,
    /// u' crossed zero from below while u > 0 (or the trajectory overflowed).
    Undershoot,
    /// No event up to r_max.
    Decaying,
}

/// One forward integration at fixed (alpha, beta), stopped at the first
/// verdict event. Profile vectors cover the nodes reached before the event.
#[derive(Debug, Clone)]
pub struct ShootingTrajectory {
    pub alpha: f64,
    pub beta: f64,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub s: Vec<f64>,
    pub ds: Vec<f64>,
    pub verdict: Verdict,
    pub r_event: f64,
}

#[derive(Debug, Clone, Copy)]
struct State {
    u: f64,
    du: f64,
    s: f64,
    ds: f64,
}

fn rhs(r: f64, y: State) -> State {
    State {
        u: y.du,
        du: -y.du / r - y.s * y.u,
        s: y.ds,
        ds: -y.ds / r - y.u * y.u,
    }
}

fn rk4_step(r: f64, y: State, h: f64) -> State {
    let k1 = rhs(r, y);
    let k2 = rhs(r + 0.5 * h, advance(y, k1, 0.5 * h));
    let k3 = rhs(r + 0.5 * h, advance(y, k2, 0.5 * h));
    let k4 = rhs(r + h, advance(y, k3, h));
    State {
        u: y.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
        du: y.du + h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du),
        s: y.s + h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s),
        ds: y.ds + h / 6.0 * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds),
    }
}

fn advance(y: State, k: State, h: f64) -> State {
    State {
        u: y.u + h * k.u,
        du: y.du + h * k.du,
        s: y.s + h * k.s,
        ds: y.ds + h * k.ds,
    }
}

fn series_start(alpha: f64, beta: f64, r: f64) -> State {
    State {
        u: alpha * (1.0 - beta * r * r / 4.0),
        du: -alpha * beta * r / 2.0,
        s: beta - alpha * alpha * r * r / 4.0,
        ds: -alpha * alpha * r / 2.0,
    }
}

fn substeps(h: f64, y: &State) -> usize {
    let rate = 1.0 + y.s.abs().sqrt() + y.u.abs().sqrt();
    ((h * rate / STEP_CAP).ceil() as usize).max(1)
}

/// Integrate the shooting system from the series start at the first node,
/// stopping at the first verdict event.
pub fn shoot(alpha: f64, beta: f64, grid: &Arc<RadialGrid>) -> Result<ShootingTrajectory> {
    if !(alpha >= 0.0) || !beta.is_finite() {
        return Err(Error::InputDomain(format!(
            "shoot requires alpha >= 0 and finite beta, got alpha={alpha}, beta={beta}"
        )));
    }
    let nodes = grid.nodes();
    let n = nodes.len();
    let mut y = series_start(alpha, beta, nodes[0]);
    let mut u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut ds = Vec::with_capacity(n);
    u.push(y.u);
    du.push(y.du);
    s.push(y.s);
    ds.push(y.ds);

    // u' > 0 straight out of the series start means the turn happened at r ~ 0
    if alpha > 0.0 && y.du > 0.0 {
        return Ok(ShootingTrajectory {
            alpha,
            beta,
            u,
            du,
            s,
            ds,
            verdict: Verdict::Undershoot,
            r_event: nodes[0],
        });
    }

    let mut verdict = Verdict::Decaying;
    let mut r_event = grid.r_max();
    'outer: for i in 0..n - 1 {
        let h_full = nodes[i + 1] - nodes[i];
        let m = substeps(h_full, &y);
        let h = h_full / m as f64;
        let mut r = nodes[i];
        for _ in 0..m {
            let prev = y;
            let prev_r = r;
            y = rk4_step(r, y, h);
            r += h;
            if !y.u.is_finite()
                || y.u.abs() > OVERFLOW_GUARD
                || y.s.abs() > OVERFLOW_GUARD
                || y.du.abs() > OVERFLOW_GUARD
            {
                verdict = Verdict::Undershoot;
                r_event = r;
                break 'outer;
            }
            if alpha > 0.0 && prev.u > 0.0 && y.u <= 0.0 {
                verdict = Verdict::Overshoot;
                r_event = prev_r + h * prev.u / (prev.u - y.u);
                break 'outer;
            }
            if y.u > 0.0 && ((prev.du < 0.0 && y.du >= 0.0) || (prev.du <= 0.0 && y.du > 0.0)) {
                verdict = Verdict::Undershoot;
                r_event = if y.du > prev.du && prev.du < 0.0 {
                    prev_r + h * (-prev.du) / (y.du - prev.du)
                } else {
                    r
                };
                break 'outer;
            }
        }
        if verdict != Verdict::Decaying {
            break;
        }
        u.push(y.u);
        du.push(y.du);
        s.push(y.s);
        ds.push(y.ds);
    }

    Ok(ShootingTrajectory {
        alpha,
        beta,
        u,
        du,
        s,
        ds,
        verdict,
        r_event,
    })
}

/// Result of the beta bisection.
#[derive(Debug, Clone)]
pub struct BetaStar {
    pub beta_star: f64,
    /// Final (undershoot, overshoot) bracket.
    pub bracket: (f64, f64),
    pub trajectory_evals: usize,
}

/// Bracket the separating beta by a geometric scan and bisect to `tol_beta`.
///
/// Classification at fixed resolution is Undershoot below beta* and
/// Overshoot above it: raising s(0) deepens the effective well until u is
/// driven through zero.
pub fn find_beta_star(alpha: f64, grid: &Arc<RadialGrid>, tol_beta: f64) -> Result<BetaStar> {
    if alpha <= 0.0 {
        return Err(Error::InputDomain("find_beta_star requires alpha > 0".into()));
    }
    let mut evals = 0usize;
    let mut classify = |beta: f64| -> Result<Verdict> {
        evals += 1;
        Ok(shoot(alpha, beta, grid)?.verdict)
    };

    // scan up for an overshoot
    let mut hi = alpha.max(1e-3);
    let mut hi_verdict = classify(hi)?;
    let mut guard = 0;
    while hi_verdict != Verdict::Overshoot {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::SearchFailure(format!(
                "no overshoot found scanning beta up to {hi} (alpha={alpha}); last verdict {hi_verdict:?}"
            )));
        }
        hi_verdict = classify(hi)?;
    }
    // scan down for an undershoot
    let mut lo = hi / 2.0;
    let mut lo_verdict = classify(lo)?;
    guard = 0;
    while lo_verdict != Verdict::Undershoot {
        if lo_verdict == Verdict::Overshoot {
            hi = lo;
        }
        lo = if lo > 1e-12 { lo / 2.0 } else { lo - alpha.max(1.0) };
        guard += 1;
        if guard > 80 {
            return Err(Error::SearchFailure(format!(
                "no undershoot found scanning beta down to {lo} (alpha={alpha})"
            )));
        }
        lo_verdict = classify(lo)?;
    }

    while hi - lo > tol_beta {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at machine resolution
        }
        match classify(mid)? {
            Verdict::Overshoot => hi = mid,
            Verdict::Undershoot => lo = mid,
            // the midpoint ran out to r_max on the separatrix: done
            Verdict::Decaying => {
                lo = mid;
                hi = mid;
                break;
            }
        }
    }

    Ok(BetaStar {
        beta_star: 0.5 * (lo + hi),
        bracket: (lo, hi),
        trajectory_evals: evals,
    })
}

/// A completed decaying solution on the full grid: forward sweep to the
/// switch node, backward Riccati completion beyond it, and a two-pass
/// update of the potential with the tail mass included.
#[derive(Debug, Clone)]
pub struct DecayingShot {
    pub alpha: f64,
    pub beta_star: f64,
    pub u: Vec<f64>,
    /// ln u at every node; immune to underflow of u itself.
    pub ln_u: Vec<f64>,
    pub du: Vec<f64>,
    pub s: Vec<f64>,
    pub ds: Vec<f64>,
    /// First node handled by the backward completion.
    pub switch_index: usize,
}

/// Shoot at beta* and complete the decaying branch over the whole grid.
pub fn solve_decaying(alpha: f64, grid: &Arc<RadialGrid>, tol_beta: f64) -> Result<DecayingShot> {
    let bs = find_beta_star(alpha, grid, tol_beta)?;
    complete_decaying(alpha, bs.beta_star, grid)
}

fn complete_decaying(alpha: f64, beta_star: f64, grid: &Arc<RadialGrid>) -> Result<DecayingShot> {
    let nodes = grid.nodes();
    let n = nodes.len();
    let u_switch = SWITCH_FRACTION * alpha;

    // forward sweep, stopping once u dips below the switch level
    let mut y = series_start(alpha, beta_star, nodes[0]);
    let mut fwd: Vec<State> = Vec::with_capacity(n);
    fwd.push(y);
    let mut ic = 0usize;
    for i in 0..n - 1 {
        let h_full = nodes[i + 1] - nodes[i];
        let m = substeps(h_full, &y);
        let h = h_full / m as f64;
        let mut r = nodes[i];
        for _ in 0..m {
            y = rk4_step(r, y, h);
            r += h;
            if !(y.u > 0.0) || y.s.abs() > OVERFLOW_GUARD {
                return Err(Error::SearchFailure(format!(
                    "trajectory at beta*={beta_star} left the decaying corridor near r={r} \
                     before reaching the switch level; tighten tol_beta"
                )));
            }
        }
        fwd.push(y);
        if y.u <= u_switch {
            ic = i + 1;
            break;
        }
    }
    if ic == 0 {
        return Err(Error::GridTooSmall(format!(
            "u never decayed below the switch level {u_switch:.3e} within r_max={}; \
             enlarge r_max",
            grid.r_max()
        )));
    }
    if ic + 4 >= n {
        return Err(Error::GridTooSmall(
            "switch node too close to r_max for the backward completion".into(),
        ));
    }

    let r_c = nodes[ic];
    let yc = fwd[ic];

    // pass 1: vacuum continuation of the potential beyond r_c
    let m_c = -r_c * yc.ds; // enclosed mass, s'(r) = -m(r)/r
    let s0 = move |r: f64| yc.s + r_c * yc.ds * (r / r_c).ln();
    let ds0 = move |r: f64| r_c * yc.ds / r;
    let (mut v_nodes, mut g_nodes) = riccati_backward(grid, ic, &s0, &ds0)?;

    // pass 2: fold the tail mass of u into the potential and resweep
    let mut s_tail = vec![0.0; n - ic];
    let mut ds_tail = vec![0.0; n - ic];
    for _pass in 0..2 {
        let ln_uc = yc.u.ln();
        let lnu_interp = CubicHermite::new(
            nodes[ic..].to_vec(),
            g_nodes.iter().map(|g| ln_uc + g).collect(),
            v_nodes.clone(),
        )?;
        // march m(r) = m_c + int u^2 t dt and s along the tail nodes
        let mut mass = m_c;
        let mut s_val = yc.s;
        s_tail[0] = s_val;
        ds_tail[0] = yc.ds;
        for j in ic..n - 1 {
            let (a, b) = (nodes[j], nodes[j + 1]);
            let h = b - a;
            let u2t = |r: f64| {
                let lu = lnu_interp.eval(r).unwrap_or(-800.0);
                (2.0 * lu).exp() * r
            };
            let dm_half = h / 12.0 * (u2t(a) + 4.0 * u2t(a + 0.25 * h) + u2t(a + 0.5 * h));
            let dm = h / 6.0 * (u2t(a) + 4.0 * u2t(a + 0.5 * h) + u2t(b));
            let ds_a = -mass / a;
            let ds_mid = -(mass + dm_half) / (a + 0.5 * h);
            let ds_b = -(mass + dm) / b;
            s_val += h / 6.0 * (ds_a + 4.0 * ds_mid + ds_b);
            mass += dm;
            s_tail[j + 1 - ic] = s_val;
            ds_tail[j + 1 - ic] = ds_b;
        }
        let s_interp = CubicHermite::new(nodes[ic..].to_vec(), s_tail.clone(), ds_tail.clone())?;
        let nodes_tail: Vec<f64> = nodes[ic..].to_vec();
        let ds_for_interp = ds_tail.clone();
        let (span_lo, span_hi) = (s_interp.x_min(), s_interp.x_max());
        // RK4 substeps can land a rounding error outside the node span
        let s_fn = move |r: f64| s_interp.eval(r.clamp(span_lo, span_hi)).unwrap_or(f64::NAN);
        let ds_fn = move |r: f64| {
            // s' is smooth and slowly varying: linear interpolation suffices
            let j = nodes_tail.partition_point(|&t| t <= r).saturating_sub(1);
            let j = j.min(nodes_tail.len() - 2);
            let t = (r - nodes_tail[j]) / (nodes_tail[j + 1] - nodes_tail[j]);
            ds_for_interp[j] * (1.0 - t) + ds_for_interp[j + 1] * t
        };
        let (v2, g2) = riccati_backward(grid, ic, &s_fn, &ds_fn)?;
        v_nodes = v2;
        g_nodes = g2;
    }

    // assemble the composite profiles
    let mut u = Vec::with_capacity(n);
    let mut ln_u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut ds = Vec::with_capacity(n);
    for st in fwd.iter().take(ic + 1) {
        u.push(st.u);
        ln_u.push(st.u.ln());
        du.push(st.du);
        s.push(st.s);
        ds.push(st.ds);
    }
    let ln_uc = yc.u.ln();
    for j in ic + 1..n {
        let lu = ln_uc + g_nodes[j - ic];
        let uu = lu.exp();
        ln_u.push(lu);
        u.push(uu);
        du.push(v_nodes[j - ic] * uu);
        s.push(s_tail[j - ic]);
        ds.push(ds_tail[j - ic]);
    }

    Ok(DecayingShot {
        alpha,
        beta_star,
        u,
        ln_u,
        du,
        s,
        ds,
        switch_index: ic,
    })
}

/// Backward sweep of the Riccati variable v = u'/u from a WKB seed at
/// r_max down to the switch node, together with G(r) = int v dr.
/// Returns (v, G) at nodes ic..n-1 with G shifted so G[0] = 0.
fn riccati_backward(
    grid: &RadialGrid,
    ic: usize,
    s_fn: &dyn Fn(f64) -> f64,
    ds_fn: &dyn Fn(f64) -> f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nodes = grid.nodes();
    let n = nodes.len();
    let r_end = nodes[n - 1];
    let q_end = -s_fn(r_end);
    if !(q_end > 0.0) {
        return Err(Error::GridTooSmall(format!(
            "potential not yet confining at r_max (s={})",
            -q_end
        )));
    }
    let dq_end = -ds_fn(r_end);
    let mut v = -q_end.sqrt() - 1.0 / (2.0 * r_end) - dq_end / (4.0 * q_end);
    let mut g = 0.0;
    let mut vs = vec![0.0; n - ic];
    let mut gs = vec![0.0; n - ic];
    vs[n - 1 - ic] = v;
    gs[n - 1 - ic] = g;
    for j in (ic..n - 1).rev() {
        let (a, b) = (nodes[j], nodes[j + 1]);
        let h_full = b - a;
        let rate = 1.0 + (-s_fn(b)).max(0.0).sqrt();
        let m = ((h_full * rate / STEP_CAP).ceil() as usize).max(1);
        let h = -h_full / m as f64;
        let mut r = b;
        for _ in 0..m {
            // RK4 on (v, g): v' = -v^2 - v/r - s(r), g' = v
            let f = |r: f64, v: f64| -v * v - v / r - s_fn(r);
            let k1 = f(r, v);
            let k2 = f(r + 0.5 * h, v + 0.5 * h * k1);
            let k3 = f(r + 0.5 * h, v + 0.5 * h * k2);
            let k4 = f(r + h, v + h * k3);
            let g1 = v;
            let g2 = v + 0.5 * h * k1;
            let g3 = v + 0.5 * h * k2;
            let g4 = v + h * k3;
            v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            g += h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
            r += h;
        }
        vs[j - ic] = v;
        gs[j - ic] = g;
    }
    let g0 = gs[0];
    for g in &mut gs {
        *g -= g0;
    }
    Ok((vs, gs))
}
