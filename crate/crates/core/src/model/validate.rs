//! Standing-hypothesis checks and derived limit constants.

use std::ops::Deref;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::richardson::{limit_at_zero, polynomial_limit_at_zero};
use crate::numerics::special::{c_alpha, gamma as gamma_fn};

use super::{Model, ModelError, ModelParams};

/// Number of grid points used by the pointwise checks.
pub const VALIDATION_GRID: usize = 10_000;
const CLOSURE_TOL: f64 = 1e-12;
const MASS_TOL: f64 = 1e-8;
const LIMIT_TOL: f64 = 1e-4;

/// One violated standing hypothesis, with the offending frequency where applicable.
#[derive(Clone, Debug, PartialEq, Serialize, Error)]
#[serde(tag = "kind")]
pub enum ValidationFailure {
    #[error("dispersion is not even and unimodal on the torus (first defect at k = {k})")]
    NonUnimodalDispersion { k: f64 },
    #[error("interface probabilities defective: {detail}")]
    ProbabilityDefect { k: Option<f64>, detail: String },
    #[error("exponents give alpha = {alpha} (beta1 = {beta1}, beta2 = {beta2}); need beta1 < 1 + beta2 and 1 < alpha < 2")]
    AlphaOutOfRange { alpha: f64, beta1: f64, beta2: f64 },
    #[error("S is not strictly decreasing on (0, 1/2] (first defect at k = {k})")]
    NonMonotoneS { k: f64 },
    #[error("integral of R2/R1 is not finite and positive (value {value})")]
    DivergentRcal { value: f64 },
    #[error("{which}: declared exponent {declared} but the coefficient behaves like |k|^{observed}")]
    ExponentMismatch { which: String, declared: f64, observed: f64 },
    #[error("{which} has total mass {mass}, expected 1")]
    NormalizationDefect { which: String, mass: f64 },
}

/// All failed hypotheses of a rejected parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Error)]
#[error("model validation failed with {} defect(s)", failures.len())]
pub struct ValidationReport {
    pub failures: Vec<ValidationFailure>,
}

/// A model whose parameters passed [`validate_params`].
#[derive(Clone, Debug)]
pub struct ValidatedModel {
    model: Model,
}

impl ValidatedModel {
    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn into_model(self) -> Model {
        self.model
    }
}

impl Deref for ValidatedModel {
    type Target = Model;

    fn deref(&self) -> &Model {
        &self.model
    }
}

/// Limit constants of a validated model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub alpha: f64,
    /// `ℛ = ∫R₂/R₁`.
    pub r_cal: f64,
    /// `θ̄ = γℛ⁻¹`.
    pub theta_bar: f64,
    pub r1_star: f64,
    pub r2_star: f64,
    pub s_star: f64,
    pub s_prime_star: f64,
    /// `p_* = lim (log 1/|k|)^κ p₀(k)`.
    pub p_star: f64,
    /// `p̃_* = p_* β₃^κ`.
    pub p_star_tilde: f64,
    pub r_star: f64,
    pub r_bar_star: f64,
    /// `γ̄ = γ r̄_*`.
    pub gamma_bar: f64,
    /// Alternative coefficient `θ̄ r̄_*`.
    pub gamma_bar_theta: f64,
    pub c_alpha: f64,
}

fn grid_half(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |i| 0.5 * i as f64 / n as f64)
}

/// Log-slope of `f` between `k` and `k/10`.
fn observed_exponent(f: impl Fn(f64) -> f64, k: f64) -> f64 {
    let (a, b) = (f(k), f(k / 10.0));
    (a / b).ln() / 10f64.ln()
}

/// Checks every standing hypothesis; returns the sealed model or the full list of defects.
pub fn validate_params(params: ModelParams) -> Result<ValidatedModel, ValidationReport> {
    let mut failures = Vec::new();
    let model = Model::new(params);
    let p = model.params();

    let alpha = p.alpha();
    if !(p.beta1 < 1.0 + p.beta2 && alpha > 1.0 && alpha < 2.0) || !alpha.is_finite() {
        failures.push(ValidationFailure::AlphaOutOfRange { alpha, beta1: p.beta1, beta2: p.beta2 });
    }

    // Even, unimodal dispersion: strictly increasing on [0, 1/2].
    let mut prev = p.dispersion.value(0.0);
    for k in grid_half(VALIDATION_GRID) {
        let w = p.dispersion.value(k);
        if !(w > prev) || (w - p.dispersion.value(-k)).abs() > 1e-14 * w.abs().max(1.0) {
            failures.push(ValidationFailure::NonUnimodalDispersion { k });
            break;
        }
        prev = w;
    }

    // Probability closure, ranges and a positive transmission infimum on the whole torus.
    let mut inf_plus = f64::INFINITY;
    for i in 0..VALIDATION_GRID {
        let k = -0.5 + (i as f64 + 0.5) / VALIDATION_GRID as f64;
        let q = model.probs(k);
        inf_plus = inf_plus.min(q.p_plus);
        let sum = q.p_plus + q.p_minus + q.p_zero;
        let in_range = [q.p_plus, q.p_minus, q.p_zero].iter().all(|v| (0.0..=1.0).contains(v));
        if (sum - 1.0).abs() > CLOSURE_TOL || !in_range {
            failures.push(ValidationFailure::ProbabilityDefect {
                k: Some(k),
                detail: format!("p+ + p- + p0 = {sum} or a probability leaves [0, 1]"),
            });
            break;
        }
    }
    if !(inf_plus > 0.0) {
        failures.push(ValidationFailure::ProbabilityDefect {
            k: None,
            detail: "transmission probability vanishes".into(),
        });
    }
    match p_star(&model) {
        Ok(v) if v > 0.0 && v.is_finite() => {}
        Ok(v) => failures.push(ValidationFailure::ProbabilityDefect {
            k: None,
            detail: format!("absorption limit p_* = {v} is not in (0, inf)"),
        }),
        Err(_) => failures.push(ValidationFailure::ProbabilityDefect {
            k: None,
            detail: "absorption limit p_* does not exist in (0, inf)".into(),
        }),
    }
    if !(p.kappa > 0.0) {
        failures.push(ValidationFailure::ProbabilityDefect {
            k: None,
            detail: format!("kappa = {} must be positive", p.kappa),
        });
    }

    for (which, prof) in [("R1", &p.r1), ("R2", &p.r2)] {
        let mass = model
            .half_torus_integral(|k| 2.0 * prof.value(k), 0.25, 1e-12)
            .unwrap_or(f64::NAN);
        if !((mass - 1.0).abs() <= MASS_TOL) {
            failures.push(ValidationFailure::NormalizationDefect { which: which.into(), mass });
        }
    }

    for (which, declared, observed) in [
        ("R1", p.beta1, observed_exponent(|k| model.r1(k), 1e-4)),
        ("R2", p.beta2, observed_exponent(|k| model.r2(k), 1e-4)),
        ("S", p.beta3, -observed_exponent(|k| model.s(k), 1e-4)),
    ] {
        if !((declared - observed).abs() <= 1e-3) {
            failures.push(ValidationFailure::ExponentMismatch {
                which: which.into(),
                declared,
                observed,
            });
        }
    }

    let mut prev = model.s(0.5 / VALIDATION_GRID as f64);
    for k in grid_half(VALIDATION_GRID).skip(1) {
        let s = model.s(k);
        if !(s < prev) {
            failures.push(ValidationFailure::NonMonotoneS { k });
            break;
        }
        prev = s;
    }

    let r_cal = r_cal(&model);
    if !(r_cal > 0.0 && r_cal.is_finite()) || p.beta2 - p.beta1 <= -1.0 {
        failures.push(ValidationFailure::DivergentRcal { value: r_cal });
    }

    if failures.is_empty() {
        Ok(ValidatedModel { model })
    } else {
        Err(ValidationReport { failures })
    }
}

fn r_cal(model: &Model) -> f64 {
    model
        .half_torus_integral(
            |k| {
                let r1 = model.r1(k);
                if r1 > 0.0 {
                    2.0 * model.r2(k) / r1
                } else {
                    f64::INFINITY
                }
            },
            0.25,
            1e-12,
        )
        .unwrap_or(f64::NAN)
}

/// `p_*` by extrapolation in `ε = 1/log(1/k)`.
fn p_star(model: &Model) -> Result<f64, ModelError> {
    let kappa = model.params().kappa;
    polynomial_limit_at_zero(
        |eps| {
            let k = (-1.0 / eps).exp();
            eps.powf(-kappa) * model.probs(k).p_zero
        },
        0.02,
        4,
        LIMIT_TOL,
    )
    .map_err(|_| ModelError::LimitNotConverged { what: "p_*" })
}

/// Computes every limit constant by quadrature and extrapolation.
pub fn derived_constants(m: &ValidatedModel) -> Result<DerivedConstants, ModelError> {
    let p = m.params();
    let alpha = m.alpha();
    let limit = |what: &'static str, f: &dyn Fn(f64) -> f64| {
        limit_at_zero(f, 1e-2, LIMIT_TOL).map_err(|_| ModelError::LimitNotConverged { what })
    };
    let r1_star = limit("R1*", &|k| m.r1(k) / k.powf(p.beta1))?;
    let r2_star = limit("R2*", &|k| m.r2(k) / k.powf(p.beta2))?;
    let s_star = limit("S_*", &|k| k.powf(p.beta3) * m.s(k).abs())?;
    let s_prime_star = limit("S'_*", &|k| k.powf(1.0 + p.beta3) * m.s_prime(k).abs())?;
    let p_star = p_star(m)?;
    let r_cal = r_cal(m);
    if !(r_cal > 0.0 && r_cal.is_finite()) {
        return Err(ModelError::LimitNotConverged { what: "R_cal" });
    }
    let theta_bar = p.gamma / r_cal;
    let r_star = r2_star * s_star.powf(1.0 + alpha) / s_prime_star;
    let r_bar_star = r_star * gamma_fn(alpha + 1.0);
    Ok(DerivedConstants {
        alpha,
        r_cal,
        theta_bar,
        r1_star,
        r2_star,
        s_star,
        s_prime_star,
        p_star,
        p_star_tilde: p_star * p.beta3.powf(p.kappa),
        r_star,
        r_bar_star,
        gamma_bar: p.gamma * r_bar_star,
        gamma_bar_theta: theta_bar * r_bar_star,
        c_alpha: c_alpha(alpha),
    })
}
