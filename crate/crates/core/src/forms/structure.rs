//! Lag structure functions of grid functions and product integration against radial kernels.
//!
//! Every form here has the shape `∫_0^∞ K(z) S(z) dz` with `S(z) = O(z²)` at the origin. On the
//! lattice `z_d = d·h` the ratio `g = S/z²` is smooth, so it is interpolated linearly on each cell
//! and integrated exactly against `z²K(z)`. The diagonal band `[0, h]` uses `g(0)` extrapolated from
//! `g(h)` and `g(2h)`.

use rayon::prelude::*;

use crate::grid::GridFunction;
use crate::numerics::sum::CompensatedSum;

use super::FormError;

/// Radial kernel with its cell moments.
pub(crate) trait LagKernel: Sync {
    /// `(∫_a^b K(z) z² dz, ∫_a^b K(z) z³ dz)`.
    fn moments(&self, a: f64, b: f64) -> Result<(f64, f64), FormError>;
    /// `∫_a^∞ K(z) dz`.
    fn tail(&self, a: f64) -> f64;
}

/// `K(z) = c·z^{−1−β}`.
pub(crate) struct PowerKernel {
    pub c: f64,
    pub beta: f64,
}

impl LagKernel for PowerKernel {
    fn moments(&self, a: f64, b: f64) -> Result<(f64, f64), FormError> {
        let (e2, e3) = (2.0 - self.beta, 3.0 - self.beta);
        let m0 = self.c * (b.powf(e2) - a.powf(e2)) / e2;
        let m1 = self.c * (b.powf(e3) - a.powf(e3)) / e3;
        Ok((m0, m1))
    }

    fn tail(&self, a: f64) -> f64 {
        self.c * a.powf(-self.beta) / self.beta
    }
}

/// Two functions restricted to the smallest window containing their supports and the interface node.
pub(crate) struct Lattice {
    pub h: f64,
    pub origin: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Index of `y = 0` inside the window.
    pub zero: Option<usize>,
}

impl Lattice {
    pub fn new(u: &GridFunction, v: &GridFunction) -> Result<Self, FormError> {
        if !u.same_grid(v) {
            return Err(FormError::GridMismatch);
        }
        if u.len() < 3 || !(u.spacing > 0.0) {
            return Err(FormError::TooFewNodes);
        }
        let nonzero = |i: &usize| u.values[*i] != 0.0 || v.values[*i] != 0.0;
        let zero = u.interface_index();
        let mut lo = (0..u.len()).find(nonzero);
        let mut hi = (0..u.len()).rev().find(nonzero);
        if let Some(z) = zero {
            lo = Some(lo.map_or(z, |l| l.min(z)));
            hi = Some(hi.map_or(z, |h| h.max(z)));
        }
        let (lo, hi) = match (lo, hi) {
            (Some(l), Some(h)) => (l, h),
            _ => (0, 0),
        };
        Ok(Self {
            h: u.spacing,
            origin: u.node(lo),
            u: u.values[lo..=hi].to_vec(),
            v: v.values[lo..=hi].to_vec(),
            zero: zero.map(|z| z - lo),
        })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    #[inline]
    fn at(x: &[f64], i: isize) -> f64 {
        if i >= 0 && (i as usize) < x.len() {
            x[i as usize]
        } else {
            0.0
        }
    }

    #[inline]
    fn increment(&self, i: isize, j: isize) -> f64 {
        (Self::at(&self.u, j) - Self::at(&self.u, i)) * (Self::at(&self.v, j) - Self::at(&self.v, i))
    }

    fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.h
    }

    /// `∫u v`, trapezoid.
    pub fn l2_inner(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for (a, b) in self.u.iter().zip(&self.v) {
            s.add(a * b);
        }
        self.h * s.value()
    }

    /// `∫ w(y) u(y) v(y) dy` over nodes off the interface.
    pub fn weighted_inner(&self, w: impl Fn(f64) -> f64) -> f64 {
        let mut s = CompensatedSum::new();
        for i in 0..self.len() {
            let (a, b) = (self.u[i], self.v[i]);
            if a != 0.0 && b != 0.0 && Some(i) != self.zero {
                s.add(w(self.node(i)) * a * b);
            }
        }
        self.h * s.value()
    }

    /// `D(z_d) = ∫(u(y+z)−u(y))(v(y+z)−v(y)) dy` for `d = 0..=d_max`.
    pub fn full(&self, d_max: usize) -> Vec<f64> {
        let n = self.len() as isize;
        let far = 2.0 * self.l2_inner();
        (0..=d_max)
            .into_par_iter()
            .map(|d| {
                let d = d as isize;
                if d >= n {
                    return far;
                }
                let mut s = CompensatedSum::new();
                for i in -d..n {
                    s.add(self.increment(i, i + d));
                }
                self.h * s.value()
            })
            .collect()
    }

    /// Trapezoid sum of `f(i)` over `i = a..=b` with half weights at both ends.
    fn trapezoid(&self, a: isize, b: isize, f: impl Fn(isize) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut s = CompensatedSum::new();
        s.add(0.5 * (f(a) + f(b)));
        for i in a + 1..b {
            s.add(f(i));
        }
        self.h * s.value()
    }

    /// Interface split of the structure function at each lag `d = 0..=d_max`:
    /// `(D_same, D_cross, (E₊ + E₋)/2)`.
    ///
    /// `D_cross(z) = ∫_{−z}^0 Δu Δv dy` collects pairs on opposite sides. `E_±(s)` integrates
    /// `(u(w)−u(y))(v(w)−v(y))` over same-side pairs with `|y| + |w| = s`, the mirrored partners of
    /// reflected jumps.
    pub fn interface_split(&self, d_max: usize) -> Result<Vec<[f64; 3]>, FormError> {
        let z0 = self.zero.ok_or(FormError::InterfaceNotOnGrid)? as isize;
        let full = self.full(d_max);
        Ok((0..=d_max)
            .into_par_iter()
            .map(|d| {
                let di = d as isize;
                let cross = self.trapezoid(z0 - di, z0, |i| self.increment(i, i + di));
                let plus = self.trapezoid(z0, z0 + di, |i| self.increment(i, 2 * z0 + di - i));
                let minus = self.trapezoid(z0 - di, z0, |i| self.increment(i, 2 * z0 - di - i));
                [full[d] - cross, cross, 0.5 * (plus + minus)]
            })
            .collect())
    }

    /// Largest lag at which the split components still change.
    pub fn max_lag(&self) -> usize {
        2 * self.len() + 2
    }
}

/// `∫_0^∞ K(z) S(z) dz` from lattice values `S(d·h)`, `d = 0..=d_max`, with `S` constant beyond
/// `d_max·h`. Returns `(value, band)`, where `band` is the contribution of `[0, h]`.
pub(crate) fn product_integrate<K: LagKernel>(
    s: &[f64],
    h: f64,
    kernel: &K,
) -> Result<(f64, f64), FormError> {
    let d_max = s.len() - 1;
    if d_max < 2 {
        return Err(FormError::TooFewNodes);
    }
    let g = |d: usize| s[d] / (d as f64 * h).powi(2);
    let g0 = (4.0 * g(1) - g(2)) / 3.0;
    let cells: Result<Vec<f64>, FormError> = (0..d_max)
        .into_par_iter()
        .map(|d| {
            let a = d as f64 * h;
            let (m0, m1) = kernel.moments(a, a + h)?;
            let slope_weight = (m1 - a * m0) / h;
            let left = if d == 0 { g0 } else { g(d) };
            Ok(left * (m0 - slope_weight) + g(d + 1) * slope_weight)
        })
        .collect();
    let cells = cells?;
    let mut total = CompensatedSum::new();
    for c in &cells {
        total.add(*c);
    }
    total.add(s[d_max] * kernel.tail(d_max as f64 * h));
    Ok((total.value(), cells[0]))
}
