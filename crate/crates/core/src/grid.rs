//! Functions sampled on a uniform grid of the line.

use serde::{Deserialize, Serialize};

use crate::numerics::sum::compensated_sum;

/// Values `u(origin + i·h)`, `i = 0..n`, extended by zero and linearly interpolated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub origin: f64,
    pub spacing: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(origin: f64, spacing: f64, values: Vec<f64>) -> Self {
        Self { origin, spacing, values }
    }

    /// Samples `f` on `n` nodes starting at `origin`.
    pub fn from_fn<F: Fn(f64) -> f64>(origin: f64, spacing: f64, n: usize, f: F) -> Self {
        let values = (0..n).map(|i| f(origin + i as f64 * spacing)).collect();
        Self { origin, spacing, values }
    }

    /// Samples `f` on the symmetric grid `[−half_width, half_width]` with spacing `h`.
    ///
    /// The node set contains `0` whenever `half_width/h` is an integer.
    pub fn symmetric<F: Fn(f64) -> f64>(half_width: f64, h: f64, f: F) -> Self {
        let m = (half_width / h).round() as i64;
        let values = (-m..=m).map(|i| f(i as f64 * h)).collect();
        Self { origin: -(m as f64) * h, spacing: h, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Linear interpolation, zero outside the grid.
    pub fn eval(&self, y: f64) -> f64 {
        let p = (y - self.origin) / self.spacing;
        if !(p >= 0.0) || p > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = (p as usize).min(self.len().saturating_sub(2));
        let f = p - i as f64;
        let a = self.values[i];
        match self.values.get(i + 1) {
            Some(&b) => a + f * (b - a),
            None => a,
        }
    }

    /// Smallest closed interval outside of which the function vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|v| *v != 0.0)?;
        let last = self.values.iter().rposition(|v| *v != 0.0)?;
        Some((self.node(first.saturating_sub(1)), self.node((last + 1).min(self.len() - 1))))
    }

    /// Index of the node `y = 0`, if the grid has one.
    pub fn interface_index(&self) -> Option<usize> {
        let p = -self.origin / self.spacing;
        let i = p.round();
        ((p - i).abs() < 1e-9 && i >= 0.0 && (i as usize) < self.len()).then_some(i as usize)
    }

    /// Value stored at the node `y = 0`, if the grid has one.
    pub fn interface_value(&self) -> Option<f64> {
        self.interface_index().map(|i| self.values[i])
    }

    /// Every second node, keeping the interface node when there is one.
    pub fn coarsen(&self) -> GridFunction {
        let start = self.interface_index().map_or(0, |i| i % 2);
        let values = self.values.iter().skip(start).step_by(2).copied().collect();
        GridFunction::new(self.node(start), 2.0 * self.spacing, values)
    }

    /// Whether both functions live on the same nodes.
    pub fn same_grid(&self, other: &GridFunction) -> bool {
        let tol = 1e-12 * self.spacing;
        self.len() == other.len()
            && (self.origin - other.origin).abs() <= tol
            && (self.spacing - other.spacing).abs() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid integral.
    pub fn integral(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let inner = compensated_sum(self.values.iter().copied());
        self.spacing * (inner - 0.5 * (self.values[0] + self.values[n - 1]))
    }

    /// Trapezoid `L²` inner product with another function evaluated on this grid.
    pub fn inner<F: Fn(f64) -> f64>(&self, other: F) -> f64 {
        let prod = GridFunction::new(
            self.origin,
            self.spacing,
            self.values.iter().enumerate().map(|(i, v)| v * other(self.node(i))).collect(),
        );
        prod.integral()
    }
}

/// Smooth bump `a·exp(1 − 1/(1 − ((y − c)/w)²))` supported on `(c − w, c + w)` with peak `a`.
pub fn bump(y: f64, center: f64, half_width: f64, amplitude: f64) -> f64 {
    let s = (y - center) / half_width;
    if s.abs() >= 1.0 {
        0.0
    } else {
        amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_support() {
        let g = GridFunction::symmetric(2.0, 0.5, |y| bump(y, 0.5, 1.0, 1.0));
        assert_eq!(g.interface_value(), Some(bump(0.0, 0.5, 1.0, 1.0)));
        assert!((g.eval(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(g.eval(5.0), 0.0);
        let (a, b) = g.support().unwrap();
        assert!(a <= -0.5 && b >= 1.5);
    }

    #[test]
    fn coarsening_keeps_the_interface_node() {
        let g = GridFunction::from_fn(-0.75, 0.25, 8, |y| y);
        let c = g.coarsen();
        assert_eq!(c.interface_value(), Some(0.0));
        assert_eq!(c.spacing, 0.5);
        assert_eq!(c.values, vec![-0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn trapezoid_of_linear_hat() {
        let g = GridFunction::from_fn(-1.0, 0.25, 9, |y: f64| 1.0 - y.abs());
        assert!((g.integral() - 1.0).abs() < 1e-15);
    }
}
