//! Model coefficients, standing-hypothesis validation, derived constants and jump kernels.

mod kernels;
mod params;
mod tables;
mod validate;

use std::f64::consts::PI;
use std::sync::OnceLock;

use thiserror::Error;

use crate::numerics::quad::QuadError;
use crate::numerics::special::sin_power_mass;

pub use kernels::q_alpha;
pub use params::{wrap_torus, Dispersion, InterfaceLaw, InterfaceProbs, ModelParams, Profile};
pub use tables::{FrequencySampler, JumpTables};
pub use validate::{
    derived_constants, validate_params, DerivedConstants, ValidatedModel, ValidationFailure,
    ValidationReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("S cannot be inverted at {x}: value outside the range of S on (0, 1/2]")]
    InversionFailed { x: f64 },
    #[error("kernel evaluated at the singular point y = 0")]
    SingularPoint,
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("limit extrapolation for {what} did not converge")]
    LimitNotConverged { what: &'static str },
}

/// All coefficient values at a single frequency `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValues {
    pub omega: f64,
    pub omega_prime: f64,
    pub r1: f64,
    pub r2: f64,
    pub t_bar: f64,
    pub s: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_zero: f64,
}

/// A model with its lazily built sampling and interpolation tables.
///
/// Construction does not check the standing hypotheses; see [`validate_params`].
#[derive(Debug)]
pub struct Model {
    params: ModelParams,
    alpha: f64,
    /// `ℛ₁ := ∫|sin πk|^e` normalization of `R₁`, cached for the step kernel.
    r1_mass: f64,
    sampler: OnceLock<FrequencySampler>,
    jumps: OnceLock<JumpTables>,
}

impl Clone for Model {
    fn clone(&self) -> Self {
        Model::new(self.params.clone())
    }
}

impl Model {
    pub fn new(params: ModelParams) -> Self {
        let alpha = params.alpha();
        let r1_mass = match params.r1 {
            Profile::SinPow { exponent } => sin_power_mass(exponent),
            Profile::Uniform => 1.0,
        };
        Self { params, alpha, r1_mass, sampler: OnceLock::new(), jumps: OnceLock::new() }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kernel_values(&self, k: f64) -> KernelValues {
        let p = self.probs(k);
        KernelValues {
            omega: self.params.dispersion.value(k),
            omega_prime: self.params.dispersion.derivative(k),
            r1: self.r1(k),
            r2: self.r2(k),
            t_bar: self.t_bar(k),
            s: self.s(k),
            p_plus: p.p_plus,
            p_minus: p.p_minus,
            p_zero: p.p_zero,
        }
    }

    #[inline]
    pub fn r1(&self, k: f64) -> f64 {
        self.params.r1.value(k)
    }

    #[inline]
    pub fn r2(&self, k: f64) -> f64 {
        self.params.r2.value(k)
    }

    #[inline]
    pub fn probs(&self, k: f64) -> InterfaceProbs {
        self.params.interface.probs(k, self.params.kappa)
    }

    /// Mean waiting time `t̄(k) = (γR₁(k))⁻¹`.
    #[inline]
    pub fn t_bar(&self, k: f64) -> f64 {
        self.step_coefficients(k).0
    }

    /// Mean free path `S(k) = ω̄′(k)t̄(k)`, with `S(0) := 0`.
    #[inline]
    pub fn s(&self, k: f64) -> f64 {
        self.step_coefficients(k).1
    }

    /// `(t̄(k), S(k))` in one evaluation; used on the hot path of the samplers.
    #[inline]
    pub fn step_coefficients(&self, k: f64) -> (f64, f64) {
        let kw = wrap_torus(k);
        let (sn, cs) = (PI * kw).sin_cos();
        let unnorm = match self.params.r1 {
            Profile::SinPow { exponent } if exponent == 2.0 => sn * sn,
            Profile::SinPow { exponent } => sn.abs().powf(exponent),
            Profile::Uniform => 1.0,
        };
        let t_bar = self.r1_mass / (self.params.gamma * unnorm);
        let w = match self.params.dispersion {
            Dispersion::AbsSin { amplitude } if kw != 0.0 => amplitude * PI * cs * kw.signum(),
            Dispersion::AbsSin { .. } => 0.0,
        };
        (t_bar, if w == 0.0 { 0.0 } else { w * t_bar })
    }

    /// Analytic derivative `S′(k)` for `k ≠ 0`.
    pub fn s_prime(&self, k: f64) -> f64 {
        let d = &self.params.dispersion;
        let r1 = self.r1(k);
        let num = d.second_derivative(k) * r1 - d.derivative(k) * self.params.r1.derivative(k);
        num / (self.params.gamma * r1 * r1)
    }

    /// Inverse of `S` restricted to `(0, 1/2]`, by bisection in `log k` to relative precision 1e-13.
    pub fn s_inverse(&self, x: f64) -> Result<f64, ModelError> {
        let x = x.abs();
        let mut lo = (1e-300f64).ln();
        let mut hi = 0.5f64.ln();
        if !(x > self.s(0.5) && x.is_finite()) || x >= self.s(lo.exp()) {
            return Err(ModelError::InversionFailed { x });
        }
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if self.s(mid.exp()) > x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }

    /// Lazily built inverse-CDF sampler for `R₂`.
    pub fn frequency_sampler(&self) -> &FrequencySampler {
        self.sampler.get_or_init(|| FrequencySampler::build(self))
    }

    /// Lazily built tables for the jump law of `S(K)τ`, `p̃_ι` and the killing rate.
    pub fn jump_tables(&self) -> &JumpTables {
        self.jumps.get_or_init(|| JumpTables::build(self))
    }
}
