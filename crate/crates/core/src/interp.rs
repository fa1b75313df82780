//! Cubic Hermite interpolation from (value, derivative) node data.

use crate::error::{Error, Result};

/// Piecewise cubic interpolant matching values and first derivatives at
/// strictly increasing nodes. Fourth-order accurate for smooth data.
#[derive(Debug, Clone)]
pub struct CubicHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl CubicHermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() != dy.len() || x.len() < 2 {
            return Err(Error::Structural(
                "CubicHermite needs matching x/y/dy with at least 2 nodes".into(),
            ));
        }
        if x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Structural("CubicHermite nodes must increase".into()));
        }
        Ok(Self { x, y, dy })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Evaluate at `x`; errors outside the node span.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < self.x_min() || x > self.x_max() {
            return Err(Error::Extrapolation(format!(
                "{} outside interpolation span [{}, {}]",
                x,
                self.x_min(),
                self.x_max()
            )));
        }
        let j = self.x.partition_point(|&t| t <= x).saturating_sub(1);
        let j = j.min(self.x.len() - 2);
        let h = self.x[j + 1] - self.x[j];
        let t = (x - self.x[j]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        Ok(h00 * self.y[j] + h10 * h * self.dy[j] + h01 * self.y[j + 1] + h11 * h * self.dy[j + 1])
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}
