//! Lévy symbol `Ψ_λ` of the free auxiliary process and the constant `θ_*`.

use std::f64::consts::PI;

use crate::model::{Model, ModelError};
use crate::numerics::quad::{gk15, integrate, integrate_breakpoints};

use super::LevyError;

/// `g(a) = a²/(1 + a²)`, the mean of `1 − cos(aτ)` over `τ ~ Exp(1)`.
#[inline]
fn exp_average(a: f64) -> f64 {
    let a2 = a * a;
    a2 / (1.0 + a2)
}

/// `Ψ_λ(ξ) = 2λ^{1+1/α}∫_0^∞ sin²(πξy) r̄(λ^{1/α}y) dy`.
///
/// Writing the jump as `S(K)τ` and averaging over `τ` in closed form gives
/// `Ψ_λ(ξ) = λ∫_0^∞ r(s) g(θs) ds` with `θ = 2πξλ^{−1/α}` and `r` the density of `S(K)`;
/// this integral is evaluated in `log s`.
pub fn levy_symbol(m: &Model, lambda: f64, xi: f64) -> Result<f64, LevyError> {
    if xi == 0.0 {
        return Ok(0.0);
    }
    let theta = 2.0 * PI * xi.abs() * lambda.powf(-1.0 / m.alpha());
    let mut failure: Option<ModelError> = None;
    let pivot = -theta.ln();
    let mut pts: Vec<f64> = [-45.0, 80.0, 0.0, pivot - 3.0, pivot, pivot + 3.0]
        .into_iter()
        .filter(|u| (-45.0..=80.0).contains(u))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let r = integrate_breakpoints(
        |u| {
            let s = u.exp();
            match m.s_density(s) {
                Ok(r) => r * s * exp_average(theta * s),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &pts,
        1e-300,
        1e-11,
    )
    .map_err(|e| LevyError::Quadrature(e.to_string()))?;
    if let Some(e) = failure {
        return Err(LevyError::Quadrature(e.to_string()));
    }
    Ok(lambda * r.value)
}

/// The same symbol as a frequency integral `λ∫_0^{1/2} R₂(k) g(θS(k)) dk` (independent oracle).
pub fn levy_symbol_kspace(m: &Model, lambda: f64, xi: f64) -> Result<f64, LevyError> {
    if xi == 0.0 {
        return Ok(0.0);
    }
    let theta = 2.0 * PI * xi.abs() * lambda.powf(-1.0 / m.alpha());
    let lo = 1e-12f64;
    let mut pts = vec![0.0, lo, 1e-9, 1e-6, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.25, 0.4, 0.5];
    if let Ok(k) = m.s_inverse(1.0 / theta) {
        pts.push(k);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let r = integrate_breakpoints(
        |k| if k <= 0.0 { 0.0 } else { m.r2(k) * exp_average(theta * m.s(k)) },
        &pts,
        1e-300,
        1e-11,
    )
    .map_err(|e| LevyError::Quadrature(e.to_string()))?;
    // On (0, 10⁻¹²) the integrand equals R₂ to within 10⁻²⁴ relative.
    Ok(lambda * r.value)
}

/// `z^α∫_z^∞ sin²(πy) y^{−1−α} dy = 1/(2α) − z^α C(z)/2` with `C(z) = ∫_z^∞ cos(2πy) y^{−1−α} dy`.
///
/// `C` at integer points is accumulated backwards from `horizon` over per-period panels, starting
/// from the first integration-by-parts term `β/(4π²) N^{−β−1}` (`β = 1 + α`) of the remainder.
#[derive(Clone, Debug)]
pub struct ThetaProfile {
    alpha: f64,
    integer_tails: Vec<f64>,
}

impl ThetaProfile {
    pub fn new(alpha: f64, horizon: u32) -> Self {
        let beta = 1.0 + alpha;
        let mut f = |y: f64| (2.0 * PI * y).cos() * y.powf(-beta);
        let n = horizon.max(2) as usize;
        let mut tails = vec![0.0; n + 1];
        tails[n] = beta / (4.0 * PI * PI) * (n as f64).powf(-beta - 1.0);
        for j in (1..n).rev() {
            let a = j as f64;
            let (l, _) = gk15(&mut f, a, a + 0.5);
            let (r, _) = gk15(&mut f, a + 0.5, a + 1.0);
            tails[j] = tails[j + 1] + l + r;
        }
        Self { alpha, integer_tails: tails }
    }

    fn cos_tail(&self, z: f64) -> f64 {
        let beta = 1.0 + self.alpha;
        let up = z.ceil();
        let j = (up as usize).min(self.integer_tails.len() - 1);
        let mut acc = self.integer_tails[j];
        if up > z {
            let f = |y: f64| (2.0 * PI * y).cos() * y.powf(-beta);
            acc += integrate(f, z, up, 1e-300, 1e-14).map(|r| r.value).unwrap_or(f64::NAN);
        }
        acc
    }

    pub fn value(&self, z: f64) -> f64 {
        1.0 / (2.0 * self.alpha) - 0.5 * z.powf(self.alpha) * self.cos_tail(z)
    }
}

/// `θ_* = inf_{z ≥ 1} z^α∫_z^∞ sin²(πy) y^{−1−α} dy`, with the oscillatory tail resolved to
/// the period `horizon`. The profile approaches `1/(2α)` with oscillations of size `O(1/z)`, so
/// the infimum is located by a scan of `[1, 50]` followed by golden-section refinement.
pub fn theta_star_with(alpha: f64, horizon: u32) -> f64 {
    let profile = ThetaProfile::new(alpha, horizon);
    let f = |z: f64| profile.value(z);
    let step = 0.01;
    let n = ((50.0 - 1.0) / step) as usize;
    let (mut best_z, mut best) = (1.0, f(1.0));
    for i in 1..=n {
        let z = 1.0 + i as f64 * step;
        let v = f(z);
        if v < best {
            best = v;
            best_z = z;
        }
    }
    let (mut a, mut b) = ((best_z - step).max(1.0), best_z + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if b - a < 1e-12 {
            break;
        }
    }
    best.min(fc).min(fd)
}

/// `θ_*` at the default resolution.
pub fn theta_star(alpha: f64) -> f64 {
    theta_star_with(alpha, 1000)
}

/// Smallest observed ratios `Ψ_λ(ξ)/(θ_*λ)` on `|ξ| ≥ λ^{1/α}` and `Ψ_λ(ξ)/(θ_*|ξ|^α)` below.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolBounds {
    pub theta_star: f64,
    pub high_constant: f64,
    pub low_constant: f64,
}

pub fn symbol_bounds(
    m: &Model,
    lambda: f64,
    xis: &[f64],
    theta_star: f64,
) -> Result<SymbolBounds, LevyError> {
    let alpha = m.alpha();
    let cut = lambda.powf(1.0 / alpha);
    let (mut high, mut low) = (f64::INFINITY, f64::INFINITY);
    for &xi in xis {
        if xi == 0.0 {
            continue;
        }
        let psi = levy_symbol(m, lambda, xi)?;
        if xi.abs() >= cut {
            high = high.min(psi / (theta_star * lambda));
        } else {
            low = low.min(psi / (theta_star * xi.abs().powf(alpha)));
        }
    }
    Ok(SymbolBounds { theta_star, high_constant: high, low_constant: low })
}
