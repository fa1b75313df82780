//! Finite-difference weights on arbitrary node sets (Fornberg's algorithm)
//! and 4th-order derivative evaluation on geometric grids.

/// Weights for the m-th derivative at `x0` from samples at `nodes`.
/// Returns one weight per node. Exact for polynomials of degree
/// `nodes.len() - 1`.
pub fn fornberg_weights(nodes: &[f64], x0: f64, m: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(m < n, "need more nodes than the derivative order");
    // c[j][k]: weight of node j for derivative order k
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// 4th-order first derivative of samples on `nodes` (5-point stencils,
/// one-sided at the boundary).
pub fn derivative_4th(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    stencil_derivative(nodes, values, 1)
}

/// 4th-order second derivative (5-point stencils; formally 3rd order at the
/// edges but centered and 4th order in the interior).
pub fn second_derivative_4th(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    stencil_derivative(nodes, values, 2)
}

fn stencil_derivative(nodes: &[f64], values: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    assert_eq!(n, values.len());
    assert!(n >= 5, "need at least 5 nodes");
    let mut out = vec![0.0; n];
    for i in 0..n {
        let lo = i.saturating_sub(2).min(n - 5);
        let w = fornberg_weights(&nodes[lo..lo + 5], nodes[i], m);
        out[i] = w
            .iter()
            .zip(&values[lo..lo + 5])
            .map(|(wi, vi)| wi * vi)
            .sum();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_reproduce_uniform_stencil() {
        let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w1 = fornberg_weights(&nodes, 0.0, 1);
        let expect = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w1.iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        let w2 = fornberg_weights(&nodes, 0.0, 2);
        let expect2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w2.iter().zip(expect2) {
            assert_relative_eq!(*a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn quartic_is_differentiated_exactly() {
        let nodes: Vec<f64> = (0..9).map(|i| 0.3 + 0.17 * (i as f64) * (1.0 + 0.05 * i as f64)).collect();
        let vals: Vec<f64> = nodes.iter().map(|x| x.powi(4) - 3.0 * x * x + x).collect();
        let d1 = derivative_4th(&nodes, &vals);
        let d2 = second_derivative_4th(&nodes, &vals);
        for (i, &x) in nodes.iter().enumerate() {
            assert_relative_eq!(d1[i], 4.0 * x.powi(3) - 6.0 * x + 1.0, max_relative = 1e-11);
            assert_relative_eq!(d2[i], 12.0 * x * x - 6.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn geometric_grid_exponential() {
        let g = crate::grid::make_log_grid(0.5, 4.0, 256).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|&r| (-r).exp()).collect();
        let d1 = derivative_4th(g.nodes(), &vals);
        let i = g.len() / 2;
        let r = g.nodes()[i];
        assert_relative_eq!(d1[i], -(-r).exp(), max_relative = 1e-9);
    }
}
