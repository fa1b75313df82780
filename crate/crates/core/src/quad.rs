//! Adaptive quadrature. Serves as the independent oracle for closed-form
//! identities and as the backend of the sqrt-log integral.

/// Adaptive Simpson with Richardson acceptance on each split.
///
/// `tol` is an absolute tolerance for the whole interval; it is divided
/// between subintervals in the usual way. `max_depth` bounds recursion.
pub fn adaptive_simpson(
    f: impl Fn(f64) -> f64 + Copy,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: impl Fn(f64) -> f64 + Copy,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-13, 40);
        assert_relative_eq!(v, 16.0, max_relative = 1e-13);
    }

    #[test]
    fn oscillatory() {
        let v = adaptive_simpson(|x| x.sin(), 0.0, PI, 1e-13, 50);
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_halfline() {
        let v = adaptive_simpson(|x| (-x * x).exp(), 0.0, 12.0, 1e-14, 55);
        assert_relative_eq!(v, PI.sqrt() / 2.0, max_relative = 1e-12);
    }
}
