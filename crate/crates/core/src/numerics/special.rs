//! Special functions and stable-law normalization constants.

use std::f64::consts::PI;

/// Euler gamma function, valid for all non-pole real arguments.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Fractional-Laplacian normalization `c_α = 2^α Γ((1+α)/2) / (√π |Γ(−α/2)|)`.
///
/// With this constant, `½∬(u(y')−u(y))² c_α|y'−y|^{−1−α}` equals `∫|2πξ|^α |û(ξ)|² dξ`.
pub fn c_alpha(alpha: f64) -> f64 {
    2f64.powf(alpha) * gamma(0.5 * (1.0 + alpha)) / (PI.sqrt() * gamma(-0.5 * alpha).abs())
}

/// `A_α = ∫_ℝ (1 − cos u) |u|^{−1−α} du` for α ∈ (0, 2).
///
/// A Lévy density `C|z|^{−1−α}` has symbol `C·A_α·|θ|^α`.
pub fn stable_symbol_constant(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        PI
    } else {
        -2.0 * gamma(-alpha) * (0.5 * PI * alpha).cos()
    }
}

/// Normalization `∫_{−1/2}^{1/2} |sin πk|^e dk = Γ((e+1)/2) / (√π Γ(e/2 + 1))`.
pub fn sin_power_mass(exponent: f64) -> f64 {
    gamma(0.5 * (exponent + 1.0)) / (PI.sqrt() * gamma(0.5 * exponent + 1.0))
}
