//! Adaptive Gauss–Kronrod (7/15) quadrature with global subdivision.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Maximum number of subintervals kept by the adaptive driver.
pub const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance: value {value}, error estimate {error}")]
    NotConverged { value: f64, error: f64 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

/// Value and error estimate of a converged quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

/// One Gauss–Kronrod 7/15 panel on `[a, b]`: (Kronrod value, |Kronrod − Gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over the finite interval `[a, b]` to `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult, QuadError> {
    integrate_breakpoints(f, &[a, b], abs_tol, rel_tol)
}

/// Integrates over `[a, ∞)` through the map `x = a + t/(1−t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult, QuadError> {
    integrate(
        |t| {
            let s = 1.0 - t;
            let v = f(a + t / s);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Integrates over consecutive breakpoints with one global error budget across all panels.
pub fn integrate_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult, QuadError> {
    let mut bad = None;
    let mut g = |x: f64| {
        let v = f(x);
        if !v.is_finite() && bad.is_none() {
            bad = Some(x);
        }
        v
    };
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (v, e) = gk15(&mut g, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    let mut converged = true;
    while err > abs_tol.max(rel_tol * total.abs()) {
        let magnitude: f64 = heap.iter().map(|p| p.value.abs()).sum();
        if err <= 64.0 * f64::EPSILON * magnitude {
            break;
        }
        if heap.len() >= MAX_INTERVALS {
            converged = false;
            break;
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            converged = false;
            break;
        }
        let (v1, e1) = gk15(&mut g, p.a, m);
        let (v2, e2) = gk15(&mut g, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
        if err < 0.0 {
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    drop(g);
    if let Some(x) = bad {
        return Err(QuadError::NonFinite { x });
    }
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    if converged {
        Ok(QuadResult { value, error })
    } else {
        Err(QuadError::NotConverged { value, error })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 2.0 * x, -1.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, 1e-12, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn non_finite_is_reported() {
        let r = integrate(|x: f64| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, 1e-8, 1e-8);
        assert!(r.is_err());
    }
}
