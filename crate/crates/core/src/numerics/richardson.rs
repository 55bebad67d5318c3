//! Richardson extrapolation of one-sided limits on a geometric grid.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("limit extrapolation did not settle: estimates {first} and {second}")]
pub struct LimitNotConverged {
    pub first: f64,
    pub second: f64,
}

/// Three-point extrapolation assuming `v_i = L + c·r^{p i}` with unknown `p`.
fn three_point(v0: f64, v1: f64, v2: f64) -> f64 {
    let d1 = v1 - v0;
    let d2 = v2 - v1;
    let scale = v2.abs().max(1e-300);
    if d2.abs() <= 1e-14 * scale || d1.abs() <= 1e-14 * scale {
        return v2;
    }
    let q = d2 / d1;
    if !(q > 0.0 && q < 1.0) {
        return v2;
    }
    v2 + d2 * q / (1.0 - q)
}

/// Extrapolates `lim_{x→0} f(x)` from `f(x0), f(x0/2), f(x0/4), f(x0/8)`.
///
/// Two overlapping three-point estimates must agree to `rel_tol`.
pub fn limit_at_zero<F: Fn(f64) -> f64>(
    f: F,
    x0: f64,
    rel_tol: f64,
) -> Result<f64, LimitNotConverged> {
    let v: Vec<f64> = (0..4).map(|i| f(x0 / 2f64.powi(i))).collect();
    let e1 = three_point(v[0], v[1], v[2]);
    let e2 = three_point(v[1], v[2], v[3]);
    if (e1 - e2).abs() <= rel_tol * e2.abs().max(1e-300) && e2.is_finite() {
        Ok(e2)
    } else {
        Err(LimitNotConverged { first: e1, second: e2 })
    }
}

/// Polynomial (Neville) extrapolation of `lim_{x→0} f(x)` for `f` smooth in `x`,
/// from `n ≥ 3` points `x0/2^i`; the last two diagonal estimates must agree to `rel_tol`.
pub fn polynomial_limit_at_zero<F: Fn(f64) -> f64>(
    f: F,
    x0: f64,
    n: usize,
    rel_tol: f64,
) -> Result<f64, LimitNotConverged> {
    let xs: Vec<f64> = (0..n).map(|i| x0 / 2f64.powi(i as i32)).collect();
    let mut t: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut diag = vec![t[n - 1]];
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (xs[i], xs[i + level]);
            t[i] = (xa * t[i + 1] - xb * t[i]) / (xa - xb);
        }
        diag.push(t[0]);
    }
    let (first, second) = (diag[n - 2], diag[n - 1]);
    if (first - second).abs() <= rel_tol * second.abs().max(1e-300) && second.is_finite() {
        Ok(second)
    } else {
        Err(LimitNotConverged { first, second })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_error_is_removed() {
        let l = limit_at_zero(|x| 3.0 + 2.0 * x * x + x.powi(4), 0.05, 1e-6).unwrap();
        assert!((l - 3.0).abs() < 1e-6);
    }

    #[test]
    fn polynomial_limit_of_rational_function() {
        let l = polynomial_limit_at_zero(|e| 0.5 / (1.0 + e).powi(2), 0.02, 5, 1e-6).unwrap();
        assert!((l - 0.5).abs() < 1e-9);
        assert!(polynomial_limit_at_zero(|e| e.powf(-2.0), 0.02, 5, 1e-4).is_err());
    }

    #[test]
    fn oscillation_is_rejected() {
        assert!(limit_at_zero(|x| (1.0 / x).sin(), 0.1, 1e-4).is_err());
    }
}
