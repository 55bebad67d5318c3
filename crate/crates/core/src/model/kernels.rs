//! Densities of the free path `S(K)` and of the jump `S(K)τ`, and the stable kernel `q_α`.

use crate::numerics::quad::integrate_breakpoints;
use crate::numerics::special::c_alpha;

use super::{Model, ModelError};

/// Stable jump density `q_α(y) = c_α/|y|^{1+α}`.
pub fn q_alpha(alpha: f64, y: f64) -> f64 {
    c_alpha(alpha) / y.abs().powf(1.0 + alpha)
}

/// Logistic chart of `(0, 1/2)`: `k = 1/(2(1+e^{−s}))`, `dk/ds = k(1 − 2k)`.
#[inline]
pub(crate) fn logistic_k(s: f64) -> (f64, f64) {
    let k = 0.5 / (1.0 + (-s).exp());
    let half_minus = 0.5 / (1.0 + s.exp());
    (k, 2.0 * k * half_minus)
}

#[inline]
fn logit_of_k(k: f64) -> f64 {
    (k / (0.5 - k)).ln()
}

impl Model {
    /// `∫_0^{1/2} f(k) dk`, resolved around the frequency `k_focus` where `f` changes scale.
    pub(crate) fn half_torus_integral<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        k_focus: f64,
        rel_tol: f64,
    ) -> Result<f64, ModelError> {
        let sp = if k_focus > 0.0 && k_focus < 0.5 { logit_of_k(k_focus) } else { 0.0 };
        let lo = (sp - 50.0).min(-50.0).max(-700.0);
        let hi = 40.0;
        let mut pts = vec![lo, hi, 0.0];
        for d in [-12.0, -4.0, -1.0, 1.0, 4.0, 12.0] {
            let s = sp + d;
            if s > lo && s < hi {
                pts.push(s);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let r = integrate_breakpoints(
            |s| {
                let (k, jac) = logistic_k(s);
                if jac == 0.0 {
                    return 0.0;
                }
                let v = f(k);
                if v == 0.0 {
                    0.0
                } else {
                    v * jac
                }
            },
            &pts,
            1e-300,
            rel_tol,
        )?;
        Ok(r.value)
    }

    /// Density `r(y)` of `S(K)` with `K ~ R₂`.
    pub fn s_density(&self, y: f64) -> Result<f64, ModelError> {
        if y == 0.0 {
            return Err(ModelError::SingularPoint);
        }
        let k = self.s_inverse(y)?;
        Ok(self.r2(k) / self.s_prime(k).abs())
    }

    /// `r̄(y) = ∫_0^∞ r(y/τ) e^{−τ} dτ/τ`, the density of `S(K)τ` with `τ ~ Exp(1)`.
    pub fn bar_r(&self, y: f64) -> Result<f64, ModelError> {
        if y == 0.0 {
            return Err(ModelError::SingularPoint);
        }
        let y = y.abs();
        let mut failure = None;
        let integrand = |s: f64| {
            let tau = s.exp();
            let e = (-tau).exp();
            if e == 0.0 {
                return 0.0;
            }
            match self.s_density(y / tau) {
                Ok(r) => r * e,
                Err(err) => {
                    failure.get_or_insert(err);
                    0.0
                }
            }
        };
        let pts = [-60.0, -20.0, -8.0, -3.0, -1.0, 0.0, 1.0, 2.0, 3.5, 6.5];
        let r = integrate_breakpoints(integrand, &pts, 1e-300, 1e-10)?;
        if let Some(err) = failure {
            return Err(err);
        }
        Ok(r.value)
    }

    /// `r̄(y) = ∫_0^{1/2} R₂(k) S(k)⁻¹ e^{−|y|/S(k)} dk`, the same density computed in frequency space.
    pub fn bar_r_kspace(&self, y: f64) -> Result<f64, ModelError> {
        if y == 0.0 {
            return Err(ModelError::SingularPoint);
        }
        let y = y.abs();
        let focus = self.s_inverse(y).unwrap_or(0.25);
        self.half_torus_integral(
            |k| {
                let s = self.s(k);
                if s <= 0.0 || !s.is_finite() {
                    return 0.0;
                }
                let e = (-y / s).exp();
                if e == 0.0 {
                    0.0
                } else {
                    self.r2(k) / s * e
                }
            },
            focus,
            1e-11,
        )
    }

    /// `r̄_λ(y) = λ^{1+1/α} r̄(λ^{1/α} y)`.
    pub fn bar_r_lambda(&self, lambda: f64, y: f64) -> Result<f64, ModelError> {
        let sc = lambda.powf(1.0 / self.alpha);
        Ok(lambda * sc * self.bar_r(sc * y)?)
    }
}
