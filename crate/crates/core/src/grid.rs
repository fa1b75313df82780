//! Geometric radial grids, quadrature for the measure r dr, and the
//! Newton-shell reduction of planar logarithmic convolutions to
//! one-dimensional integrals.
//!
//! All integrals here are computed in the log variable t = ln r, where the
//! grid is uniform. The composite trapezoid rule in t carries Gregory
//! end corrections of order 4, so smooth integrands that decay at both
//! ends are integrated to near machine precision and polynomial ones to
//! O(dt^4). Kernels with a kink on the diagonal (min/max type) are split
//! at the diagonal node and each smooth piece gets its own end corrections.

use crate::error::{Error, Result};
use std::io::Write as IoWrite;
use std::sync::Arc;

/// Minimum number of nodes in a piece before Gregory end corrections apply.
const GREGORY_MIN_NODES: usize = 7;

/// Strictly increasing positive nodes with quadrature weights for r dr.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_step: f64,
    r_max: f64,
}

impl RadialGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Uniform step of ln r between adjacent nodes.
    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    /// Index of the first node >= r, or None when r lies beyond the grid.
    pub fn first_node_at_or_above(&self, r: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&x| x < r);
        (i < self.nodes.len()).then_some(i)
    }

    /// New grid over the node subrange [lo, hi] (inclusive), with weights
    /// recomputed for that range. The inner [0, r_lo] closure term is not
    /// included: the subrange is treated as a domain in its own right.
    pub fn subrange(&self, lo: usize, hi: usize) -> RadialGrid {
        assert!(lo < hi && hi < self.nodes.len());
        let nodes: Vec<f64> = self.nodes[lo..=hi].to_vec();
        let weights = gregory_weights_r_dr(&nodes, self.log_step, false);
        RadialGrid {
            r_max: nodes[hi - lo],
            nodes,
            weights,
            log_step: self.log_step,
        }
    }

    fn same_as(&self, other: &RadialGrid) -> bool {
        std::ptr::eq(self, other)
            || (self.nodes.len() == other.nodes.len()
                && self.nodes[0] == other.nodes[0]
                && self.r_max == other.r_max)
    }
}

fn gregory_weights_r_dr(nodes: &[f64], dt: f64, inner_closure: bool) -> Vec<f64> {
    let n = nodes.len();
    let mut w: Vec<f64> = nodes.iter().map(|r| dt * r * r).collect();
    if n >= GREGORY_MIN_NODES {
        for (i, c) in [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0].iter().enumerate() {
            w[i] *= c;
            w[n - 1 - i] *= c;
        }
    } else {
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
    }
    if inner_closure {
        // [0, r_min] stub: the integrand is evenly extended across r = 0.
        w[0] += nodes[0] * nodes[0] / 2.0;
    }
    w
}

/// Build a geometric grid from r_min to r_max with n nodes and weights
/// approximating integration against r dr.
pub fn make_log_grid(r_min: f64, r_max: f64, n: usize) -> Result<RadialGrid> {
    if !r_min.is_finite() || !r_max.is_finite() || r_min <= 0.0 || r_max <= r_min {
        return Err(Error::InputDomain(format!(
            "make_log_grid requires 0 < r_min < r_max, got r_min={r_min}, r_max={r_max}"
        )));
    }
    if n < 16 {
        return Err(Error::InputDomain(format!(
            "make_log_grid requires n >= 16, got {n}"
        )));
    }
    let dt = (r_max / r_min).ln() / (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n).map(|i| r_min * (i as f64 * dt).exp()).collect();
    nodes[n - 1] = r_max;
    let weights = gregory_weights_r_dr(&nodes, dt, true);
    Ok(RadialGrid {
        nodes,
        weights,
        log_step: dt,
        r_max,
    })
}

/// A real-valued function sampled on a radial grid.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "profile has {} values on a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InputDomain("profile contains non-finite values".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise map, staying on the same grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// CSV with columns `r,value`, 17 significant digits.
    pub fn write_csv(&self, out: &mut dyn IoWrite) -> Result<()> {
        writeln!(out, "r,value")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{r:.16e},{v:.16e}")?;
        }
        Ok(())
    }
}

/// Complex-valued companion of [`RadialProfile`], used by the angular-sector
/// quadratic forms.
#[derive(Debug, Clone)]
pub struct ComplexRadialProfile {
    grid: Arc<RadialGrid>,
    values: Vec<num_complex::Complex64>,
}

impl ComplexRadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<num_complex::Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "profile has {} values on a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[num_complex::Complex64] {
        &self.values
    }

    /// CSV with columns `r,value,value_im`, 17 significant digits.
    pub fn write_csv(&self, out: &mut dyn IoWrite) -> Result<()> {
        writeln!(out, "r,value,value_im")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{r:.16e},{:.16e},{:.16e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Approximate the integral of f against r dr over [0, r_max].
pub fn integrate_radial(f: &RadialProfile) -> f64 {
    f.grid
        .weights()
        .iter()
        .zip(f.values())
        .map(|(w, v)| w * v)
        .sum()
}

/// Same pairing for raw samples already known to live on `grid`.
pub fn integrate_samples(grid: &RadialGrid, values: &[f64]) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(
            "integrate_samples: length mismatch".into(),
        ));
    }
    Ok(grid.weights().iter().zip(values).map(|(w, v)| w * v).sum())
}

/// Trapezoid-in-log integral of the node subrange [l, m] of a t-space
/// integrand g (g already contains the e^{2t} measure factor), with
/// Gregory end corrections of order 4 when the piece is long enough.
fn piece_integral(g: &[f64], prefix: &[f64], l: usize, m: usize, dt: f64) -> f64 {
    if m <= l {
        return 0.0;
    }
    let sum = prefix[m] - if l == 0 { 0.0 } else { prefix[l - 1] };
    let mut q = dt * (sum - 0.5 * (g[l] + g[m]));
    if m - l + 1 >= GREGORY_MIN_NODES {
        let d_lo = g[l + 1] - g[l];
        let d_hi = g[m] - g[m - 1];
        let d2_lo = g[l + 2] - 2.0 * g[l + 1] + g[l];
        let d2_hi = g[m] - 2.0 * g[m - 1] + g[m - 2];
        q += dt / 12.0 * (d_lo - d_hi) - dt / 24.0 * (d2_lo + d2_hi);
    }
    q
}

fn prefix_sums(g: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    g.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Shell reduction of the planar log potential without the sign check:
/// w(r_i) = Int_0^{r_max} d(s) s ln(1/max(r_i, s)) ds, kink split at s = r_i.
/// Used internally for signed densities (variational second derivatives).
pub(crate) fn shell_apply(grid: &RadialGrid, density: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let nodes = grid.nodes();
    let dt = grid.log_step();
    // g = d(s) s^2 (mass integrand in t), h = -d(s) s^2 ln s (outer integrand)
    let g: Vec<f64> = (0..n).map(|j| density[j] * nodes[j] * nodes[j]).collect();
    let h: Vec<f64> = (0..n).map(|j| -g[j] * nodes[j].ln()).collect();
    let pg = prefix_sums(&g);
    let ph = prefix_sums(&h);
    let closure = density[0] * nodes[0] * nodes[0] / 2.0;
    (0..n)
        .map(|i| {
            let mass_in = piece_integral(&g, &pg, 0, i, dt) + closure;
            let outer = piece_integral(&h, &ph, i, n - 1, dt);
            -nodes[i].ln() * mass_in + outer
        })
        .collect()
}

/// w(r_i) = Int d(s) s ln(1/max(r_i, s)) ds for a nonnegative density.
pub fn shell_potential(density: &RadialProfile) -> Result<RadialProfile> {
    if density.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InputDomain(
            "shell_potential requires a nonnegative density".into(),
        ));
    }
    let w = shell_apply(density.grid(), density.values());
    RadialProfile::new(density.grid().clone(), w)
}

/// Int_r^{r_max} ln(s/r) d(s) s ds — the guaranteed bound on |w(r) + m ln r|
/// for a nonnegative density of mass m.
pub fn potential_tail_bound(density: &RadialProfile, r: f64) -> Result<f64> {
    let grid = density.grid();
    let nodes = grid.nodes();
    if !(r >= nodes[0] && r <= grid.r_max()) {
        return Err(Error::InputDomain(format!(
            "tail bound radius {r} outside grid range [{}, {}]",
            nodes[0],
            grid.r_max()
        )));
    }
    let n = grid.len();
    let d = density.values();
    let j0 = grid.first_node_at_or_above(r).unwrap_or(n);
    if j0 >= n {
        return Ok(0.0);
    }
    let g: Vec<f64> = (0..n).map(|j| d[j] * nodes[j] * nodes[j]).collect();
    let h: Vec<f64> = (0..n).map(|j| g[j] * nodes[j].ln()).collect();
    let pg = prefix_sums(&g);
    let ph = prefix_sums(&h);
    let mut bound =
        piece_integral(&h, &ph, j0, n - 1, dt_of(grid)) - r.ln() * piece_integral(&g, &pg, j0, n - 1, dt_of(grid));
    if nodes[j0] > r {
        // stub [r, r_{j0}]: integrand vanishes at s = r
        bound += 0.5 * (nodes[j0] - r) * d[j0] * nodes[j0] * (nodes[j0] / r).ln();
    }
    Ok(bound.max(0.0))
}

fn dt_of(grid: &RadialGrid) -> f64 {
    grid.log_step()
}

/// Check that two profiles live on the same grid.
pub fn require_same_grid(a: &RadialProfile, b: &RadialProfile) -> Result<()> {
    if a.grid().same_as(b.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch("profiles on different grids".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;
    use approx::assert_relative_eq;

    fn grid_4096() -> Arc<RadialGrid> {
        Arc::new(make_log_grid(1e-6, 50.0, 4096).unwrap())
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(make_log_grid(1.0, 1.0, 64).is_err());
        assert!(make_log_grid(2.0, 1.0, 64).is_err());
        assert!(make_log_grid(0.0, 1.0, 64).is_err());
        assert!(make_log_grid(f64::NAN, 1.0, 64).is_err());
        assert!(make_log_grid(1e-3, 1.0, 8).is_err());
    }

    #[test]
    fn grid_invariants() {
        let g = grid_4096();
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1] && w[0] > 0.0));
        assert!(g.weights().iter().all(|&w| w > 0.0));
        assert_relative_eq!(g.r_max(), 50.0);
    }

    #[test]
    fn weight_sum_is_half_rmax_squared() {
        let g = grid_4096();
        let total: f64 = g.weights().iter().sum();
        assert_relative_eq!(total, 1250.0, max_relative = 1e-6);
    }

    #[test]
    fn quadrature_exactness_low_powers() {
        let g = grid_4096();
        for (p, exact) in [(0i32, 1250.0), (1, 50.0_f64.powi(3) / 3.0), (2, 50.0_f64.powi(4) / 4.0)] {
            let f = RadialProfile::from_fn(g.clone(), |r| r.powi(p)).unwrap();
            assert_relative_eq!(integrate_radial(&f), exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn exp_decay_integral_matches_adaptive_oracle() {
        // oracle: adaptive quadrature of r e^{-r} over [0, 50] (tail < 1e-19)
        let oracle = adaptive_simpson(|r| r * (-r).exp(), 0.0, 50.0, 1e-13, 60);
        let g = grid_4096();
        let f = RadialProfile::from_fn(g, |r| (-r).exp()).unwrap();
        assert_relative_eq!(integrate_radial(&f), oracle, max_relative = 1e-8);
        assert_relative_eq!(integrate_radial(&f), 1.0, max_relative = 1e-8);
    }

    #[test]
    fn gaussian_integral_closed_form() {
        let g = grid_4096();
        let f = RadialProfile::from_fn(g, |r| (-r * r).exp()).unwrap();
        assert_relative_eq!(integrate_radial(&f), 0.5, max_relative = 1e-9);
    }

    #[test]
    fn integrate_zero_is_zero() {
        let g = grid_4096();
        let f = RadialProfile::from_fn(g, |_| 0.0).unwrap();
        assert_eq!(integrate_radial(&f), 0.0);
    }

    #[test]
    fn profile_length_mismatch_rejected() {
        let g = grid_4096();
        assert!(RadialProfile::new(g.clone(), vec![0.0; 7]).is_err());
        assert!(RadialProfile::new(g, vec![f64::NAN; 4096]).is_err());
    }

    #[test]
    fn shell_of_zero_is_zero() {
        let g = grid_4096();
        let d = RadialProfile::from_fn(g, |_| 0.0).unwrap();
        let w = shell_potential(&d).unwrap();
        assert!(w.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shell_rejects_negative_density() {
        let g = grid_4096();
        let d = RadialProfile::from_fn(g, |r| 1.0 - r).unwrap();
        assert!(shell_potential(&d).is_err());
    }

    #[test]
    fn shell_of_unit_disc_indicator() {
        // density = 1 on (0,1]: w(2) = ln(1/2) * Int_0^1 s ds = -(1/2) ln 2
        let g = Arc::new(make_log_grid(1e-6, 8.0, 8192).unwrap());
        let d = RadialProfile::from_fn(g.clone(), |r| if r <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let w = shell_potential(&d).unwrap();
        let i2 = g.first_node_at_or_above(2.0).unwrap();
        // indicator has a jump, so only the trapezoid order survives here
        assert_relative_eq!(w.values()[i2], -0.5 * 2.0_f64.ln(), max_relative = 2e-3);
    }

    #[test]
    fn shell_is_smooth_density_accurate() {
        // d = e^{-r^2}: w(r) = ln(1/r) Int_0^r + Int_r^inf ln(1/s) ... via oracle
        let g = Arc::new(make_log_grid(1e-6, 30.0, 4096).unwrap());
        let d = RadialProfile::from_fn(g.clone(), |r| (-r * r).exp()).unwrap();
        let w = shell_potential(&d).unwrap();
        for &r in &[0.5, 1.0, 2.0, 5.0] {
            let i = g.first_node_at_or_above(r).unwrap();
            let ri = g.nodes()[i];
            let inner = adaptive_simpson(|s| s * (-s * s).exp(), 0.0, ri, 1e-14, 60);
            let outer =
                adaptive_simpson(|s| -s.ln() * s * (-s * s).exp(), ri, 30.0, 1e-14, 60);
            let oracle = -ri.ln() * inner + outer;
            assert_relative_eq!(w.values()[i], oracle, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn shell_monotone_nonincreasing_for_nonneg_density() {
        let g = Arc::new(make_log_grid(1e-4, 20.0, 1024).unwrap());
        let d = RadialProfile::from_fn(g, |r| (-r).exp() * (1.0 + r)).unwrap();
        let w = shell_potential(&d).unwrap();
        assert!(w.values().windows(2).all(|p| p[1] <= p[0] + 1e-14));
    }

    #[test]
    fn tail_bound_empty_tail_is_zero() {
        let g = Arc::new(make_log_grid(1e-4, 20.0, 1024).unwrap());
        let d = RadialProfile::from_fn(g.clone(), |r| if r <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let b = potential_tail_bound(&d, 5.0).unwrap();
        assert!(b.abs() < 1e-14);
    }

    #[test]
    fn tail_bound_disc_closed_form() {
        // density = indicator of (0, 2], r = 1: Int_1^2 ln(s) s ds = 2 ln 2 - 3/4
        let g = Arc::new(make_log_grid(1e-6, 8.0, 16384).unwrap());
        let d = RadialProfile::from_fn(g.clone(), |r| if r <= 2.0 { 1.0 } else { 0.0 }).unwrap();
        let i1 = g.first_node_at_or_above(1.0).unwrap();
        let r1 = g.nodes()[i1];
        let exact = adaptive_simpson(|s| (s / r1).ln() * s, r1, 2.0, 1e-13, 60);
        assert_relative_eq!(exact, 2.0 * 2.0_f64.ln() - 0.75, max_relative = 1e-3);
        let b = potential_tail_bound(&d, r1).unwrap();
        // jump density again: trapezoid order at the support edge
        assert_relative_eq!(b, exact, max_relative = 2e-3);
    }

    #[test]
    fn tail_bound_outside_grid_rejected() {
        let g = Arc::new(make_log_grid(1e-4, 20.0, 1024).unwrap());
        let d = RadialProfile::from_fn(g, |_| 1.0).unwrap();
        assert!(potential_tail_bound(&d, 30.0).is_err());
        assert!(potential_tail_bound(&d, 1e-6).is_err());
    }

    #[test]
    fn tail_law_holds_at_every_node() {
        // |w(r) + m ln r| <= tail bound, for a smooth nonnegative density
        let g = Arc::new(make_log_grid(1e-5, 40.0, 2048).unwrap());
        let d = RadialProfile::from_fn(g.clone(), |r| (-0.7 * r).exp()).unwrap();
        let w = shell_potential(&d).unwrap();
        let m = integrate_radial(&d);
        let dt = g.log_step();
        let slack = 20.0 * dt.powi(4) * m;
        for (i, &r) in g.nodes().iter().enumerate() {
            let lhs = (w.values()[i] + m * r.ln()).abs();
            let rhs = potential_tail_bound(&d, r).unwrap();
            assert!(
                lhs <= rhs + slack * (1.0 + r.ln().abs()) + 1e-12,
                "tail law violated at node {i} (r={r}): {lhs} > {rhs}"
            );
        }
    }

    #[test]
    fn csv_roundtrip_format() {
        let g = Arc::new(make_log_grid(0.1, 10.0, 16).unwrap());
        let f = RadialProfile::from_fn(g, |r| r.sin()).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,value\n"));
        assert_eq!(text.lines().count(), 17);
        let first = text.lines().nth(1).unwrap();
        let r: f64 = first.split(',').next().unwrap().parse().unwrap();
        assert_relative_eq!(r, 0.1, max_relative = 1e-15);
    }
}
