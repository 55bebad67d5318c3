//! Model coefficients: dispersion relation, scattering profiles and interface probabilities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::special::sin_power_mass;

/// Maps a torus coordinate to the fundamental domain `[-1/2, 1/2)`.
#[inline]
pub fn wrap_torus(k: f64) -> f64 {
    k - (k + 0.5).floor()
}

/// Dispersion relation `ω̄` on the torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dispersion {
    /// `ω̄(k) = a|sin πk|`.
    AbsSin { amplitude: f64 },
}

impl Dispersion {
    pub fn value(&self, k: f64) -> f64 {
        match *self {
            Dispersion::AbsSin { amplitude } => amplitude * (PI * wrap_torus(k)).sin().abs(),
        }
    }

    /// Group velocity `ω̄′(k)`, with `ω̄′(0) := 0`.
    pub fn derivative(&self, k: f64) -> f64 {
        let k = wrap_torus(k);
        if k == 0.0 {
            return 0.0;
        }
        match *self {
            Dispersion::AbsSin { amplitude } => amplitude * PI * (PI * k).cos() * k.signum(),
        }
    }

    /// Second derivative away from `k = 0`.
    pub fn second_derivative(&self, k: f64) -> f64 {
        let k = wrap_torus(k);
        match *self {
            Dispersion::AbsSin { amplitude } => -amplitude * PI * PI * (PI * k).sin().abs(),
        }
    }

    /// Exponent `e` with `ω̄′(k) ~ c·|k|^e` as `k → 0`.
    pub fn velocity_exponent(&self) -> f64 {
        match self {
            Dispersion::AbsSin { .. } => 0.0,
        }
    }
}

/// Normalized scattering profile `R_j` on the torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `R(k) = |sin πk|^e / ∫|sin πk|^e`.
    SinPow { exponent: f64 },
    /// `R ≡ 1`.
    Uniform,
}

impl Profile {
    pub fn value(&self, k: f64) -> f64 {
        match *self {
            Profile::SinPow { exponent } => {
                (PI * wrap_torus(k)).sin().abs().powf(exponent) / sin_power_mass(exponent)
            }
            Profile::Uniform => 1.0,
        }
    }

    pub fn derivative(&self, k: f64) -> f64 {
        match *self {
            Profile::SinPow { exponent } => {
                let k = wrap_torus(k);
                if k == 0.0 {
                    return 0.0;
                }
                let s = (PI * k).sin().abs();
                exponent * PI * (PI * k).cos() * k.signum() * s.powf(exponent - 1.0)
                    / sin_power_mass(exponent)
            }
            Profile::Uniform => 0.0,
        }
    }

    /// Exponent `β` with `R(k) ~ R_*|k|^β` as `k → 0`.
    pub fn exponent(&self) -> f64 {
        match *self {
            Profile::SinPow { exponent } => exponent,
            Profile::Uniform => 0.0,
        }
    }
}

/// Transmission, reflection and absorption probabilities at a crossing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceProbs {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_zero: f64,
}

/// Family of interface probability functions `p_±, p_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterfaceLaw {
    /// Frequency-independent probabilities.
    Constant { p_plus: f64, p_minus: f64, p_zero: f64 },
    /// `p_0(k) = p_c/(1 + log(1/|k|))^κ`, `p_+ = a(1 − p_0)`, `p_− = (1 − a)(1 − p_0)`.
    LogAbsorbing { transmit_share: f64, p_c: f64 },
}

impl InterfaceLaw {
    pub fn probs(&self, k: f64, kappa: f64) -> InterfaceProbs {
        match *self {
            InterfaceLaw::Constant { p_plus, p_minus, p_zero } => {
                InterfaceProbs { p_plus, p_minus, p_zero }
            }
            InterfaceLaw::LogAbsorbing { transmit_share, p_c } => {
                let a = wrap_torus(k).abs();
                let p_zero = if a == 0.0 { 0.0 } else { p_c / (1.0 + (1.0 / a).ln()).powf(kappa) };
                let rest = 1.0 - p_zero;
                InterfaceProbs {
                    p_plus: transmit_share * rest,
                    p_minus: rest - transmit_share * rest,
                    p_zero,
                }
            }
        }
    }
}

/// Full coefficient set of the kinetic model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Scattering rate `γ`.
    pub gamma: f64,
    /// Thermostat temperature `T_o`.
    pub t_o: f64,
    /// Logarithmic decay exponent `κ` of `p_0` at `k = 0`.
    pub kappa: f64,
    pub interface: InterfaceLaw,
    pub dispersion: Dispersion,
    pub r1: Profile,
    pub r2: Profile,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

impl ModelParams {
    /// `ω̄ = |sin πk|`, `R₁ = R₂ = 2sin²(πk)`, `γ = 1`, `p₀(k) = 1/(1 + log(1/|k|))`, `p₊ = 0.7(1 − p₀)`.
    pub fn default_model() -> Self {
        Self::from_families(
            1.0,
            0.0,
            1.0,
            InterfaceLaw::LogAbsorbing { transmit_share: 0.7, p_c: 1.0 },
            Dispersion::AbsSin { amplitude: 1.0 },
            Profile::SinPow { exponent: 2.0 },
            Profile::SinPow { exponent: 2.0 },
        )
    }

    /// Builds parameters with exponents read off the chosen families.
    pub fn from_families(
        gamma: f64,
        t_o: f64,
        kappa: f64,
        interface: InterfaceLaw,
        dispersion: Dispersion,
        r1: Profile,
        r2: Profile,
    ) -> Self {
        let beta1 = r1.exponent();
        let beta2 = r2.exponent();
        let beta3 = beta1 - dispersion.velocity_exponent();
        Self { gamma, t_o, kappa, interface, dispersion, r1, r2, beta1, beta2, beta3 }
    }

    /// `α = (1 + β₂)/β₃`.
    pub fn alpha(&self) -> f64 {
        (1.0 + self.beta2) / self.beta3
    }

    pub fn with_interface(mut self, interface: InterfaceLaw) -> Self {
        self.interface = interface;
        self
    }
}
