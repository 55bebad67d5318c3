//! Fractional Sobolev energies, the interface form `Ê`, the killed jump forms `Ê_λ`, Hardy ratios,
//! the sign-product sequence `s_m` and the Γ-convergence harness.

mod harness;
mod hardy;
mod sequence;
mod structure;

use serde::Serialize;
use thiserror::Error;

use crate::grid::GridFunction;
use crate::model::{JumpTables, Model};
use crate::numerics::quad::{integrate, QuadError};
use crate::numerics::special::c_alpha;

pub use harness::{gamma_harness, GammaReport, GammaRow, LiminfRow};
pub use hardy::{hardy_ratio, sobolev_norm_sq, HardyReport};
pub use sequence::{
    s_sequence, s_sequence_exact, s_sequence_enumerated, SequencePattern,
};

use structure::{product_integrate, LagKernel, Lattice, PowerKernel};

/// Largest accepted relative change of a form value between spacings `2h` and `h`.
pub const REFINEMENT_RTOL: f64 = 1e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("quadrature not converged: value {value} at spacing h, {coarse} at 2h")]
    QuadratureNotConverged { value: f64, coarse: f64 },
    #[error("numerator diverges: u(0) = {interface_value}, numerator {numerator} at h, {coarse} at 2h")]
    DivergentNumerator { interface_value: f64, numerator: f64, coarse: f64 },
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("the grid has no node at the interface y = 0")]
    InterfaceNotOnGrid,
    #[error("grid has too few nodes")]
    TooFewNodes,
    #[error("exponent {beta} outside the admissible range")]
    InvalidExponent { beta: f64 },
    #[error("interface probabilities p₊ = {p_plus}, p₋ = {p_minus} are not a sub-probability")]
    InvalidProbabilities { p_plus: f64, p_minus: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Value of a form with its refinement error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FormReport {
    pub value: f64,
    /// `|F_h − F_{2h}|/3`, the second-order refinement estimate.
    pub error: f64,
    /// Value on the grid of spacing `2h`.
    pub coarse: f64,
    /// Contribution of the diagonal band `|y − y′| < h`.
    pub band: f64,
    pub spacing: f64,
}

fn check_beta(beta: f64) -> Result<(), FormError> {
    if beta > 0.0 && beta < 2.0 {
        Ok(())
    } else {
        Err(FormError::InvalidExponent { beta })
    }
}

fn check_probs(p_plus: f64, p_minus: f64) -> Result<(), FormError> {
    let ok = (0.0..=1.0).contains(&p_plus)
        && (0.0..=1.0).contains(&p_minus)
        && p_plus + p_minus <= 1.0 + 1e-12;
    if ok {
        Ok(())
    } else {
        Err(FormError::InvalidProbabilities { p_plus, p_minus })
    }
}

/// Runs `eval` on the grid and on its coarsening, and rejects results that move by more than
/// `REFINEMENT_RTOL` relative to `scale`.
fn refined<F>(u: &GridFunction, v: &GridFunction, scale: Option<f64>, eval: F) -> Result<FormReport, FormError>
where
    F: Fn(&GridFunction, &GridFunction) -> Result<(f64, f64), FormError>,
{
    let (value, band) = eval(u, v)?;
    let (coarse, _) = eval(&u.coarsen(), &v.coarsen())?;
    let error = (value - coarse).abs() / 3.0;
    let scale = scale.unwrap_or(value.abs()).max(f64::MIN_POSITIVE);
    if (value - coarse).abs() > REFINEMENT_RTOL * scale && (value - coarse).abs() > 1e-13 {
        return Err(FormError::QuadratureNotConverged { value, coarse });
    }
    Ok(FormReport { value, error, coarse, band, spacing: u.spacing })
}

fn sobolev_single(u: &GridFunction, beta: f64) -> Result<(f64, f64), FormError> {
    let lat = Lattice::new(u, u)?;
    let d = lat.full(lat.len() + 2);
    product_integrate(&d, lat.h, &PowerKernel { c: c_alpha(beta), beta })
}

/// `ℰ_β[u] = ½∬(u(y′)−u(y))² q_β(y′−y) dy dy′` with `q_β = c_β|z|^{−1−β}`.
///
/// `u` is extended by zero outside its grid.
pub fn sobolev_energy(u: &GridFunction, beta: f64) -> Result<FormReport, FormError> {
    check_beta(beta)?;
    refined(u, u, None, |a, _| sobolev_single(a, beta))
}

fn interface_single(
    u: &GridFunction,
    v: &GridFunction,
    alpha: f64,
    p_plus: f64,
    p_minus: f64,
) -> Result<(f64, f64), FormError> {
    let lat = Lattice::new(u, v)?;
    let split = lat.interface_split(lat.max_lag())?;
    let s: Vec<f64> = split.iter().map(|c| c[0] + p_plus * c[1] + p_minus * c[2]).collect();
    product_integrate(&s, lat.h, &PowerKernel { c: c_alpha(alpha), beta: alpha })
}

/// Interface form `Ê[u, v]` on a single grid, without the refinement check.
///
/// Used for Monte Carlo fields, whose coarsening is not a refinement of the same function.
pub fn interface_form_single(
    u: &GridFunction,
    v: &GridFunction,
    alpha: f64,
    p_plus: f64,
    p_minus: f64,
) -> Result<f64, FormError> {
    check_beta(alpha)?;
    check_probs(p_plus, p_minus)?;
    Ok(interface_single(u, v, alpha, p_plus, p_minus)?.0)
}

/// Bilinear interface form
/// `Ê[u, v] = ½∬ Δu Δv q_α (1_{yy′>0} + p₊1_{yy′<0}) + ½∬ (u(−y′)−u(y))(v(−y′)−v(y)) q_α p₋ 1_{yy′<0}`.
///
/// The grid must contain the node `y = 0`.
pub fn interface_form(
    u: &GridFunction,
    v: &GridFunction,
    alpha: f64,
    p_plus: f64,
    p_minus: f64,
) -> Result<FormReport, FormError> {
    check_beta(alpha)?;
    check_probs(p_plus, p_minus)?;
    let eval = |a: &GridFunction, b: &GridFunction| interface_single(a, b, alpha, p_plus, p_minus);
    let scale = if u == v {
        None
    } else {
        let qu = eval(u, u)?.0;
        let qv = eval(v, v)?.0;
        Some((qu * qv).abs().sqrt())
    };
    refined(u, v, scale, eval)
}

/// `Ê[u] = Ê[u, u]`.
pub fn interface_energy(u: &GridFunction, alpha: f64, p_plus: f64, p_minus: f64) -> Result<FormReport, FormError> {
    interface_form(u, u, alpha, p_plus, p_minus)
}

/// `r̄_λ(z) = λ^{1+1/α} r̄(λ^{1/α}z)` with moments from the tabulated `r̄`.
struct BarRLambda<'a> {
    tables: &'a JumpTables,
    lambda: f64,
    scale: f64,
}

impl LagKernel for BarRLambda<'_> {
    fn moments(&self, a: f64, b: f64) -> Result<(f64, f64), FormError> {
        let (xa, xb) = (self.scale * a, self.scale * b);
        let pref = self.lambda * self.scale;
        let m = |j: i32| -> Result<f64, FormError> {
            let r = integrate(|x: f64| self.tables.bar_r(x) * x.powi(2 + j), xa, xb, 1e-300, 1e-11)?;
            Ok(pref * r.value / self.scale.powi(3 + j))
        };
        Ok((m(0)?, m(1)?))
    }

    fn tail(&self, a: f64) -> f64 {
        0.5 * self.lambda * self.tables.tail(self.scale * a)
    }
}

fn lambda_single(u: &GridFunction, m: &Model, lambda: f64) -> Result<(f64, f64), FormError> {
    let lat = Lattice::new(u, u)?;
    let tables = m.jump_tables();
    let scale = lambda.powf(1.0 / m.alpha());
    let h = lat.h;
    let split = lat.interface_split(lat.max_lag())?;
    let s: Vec<f64> = split
        .iter()
        .enumerate()
        .map(|(d, c)| {
            if d == 0 {
                return 0.0;
            }
            let p = tables.ptilde(scale * d as f64 * h);
            c[0] + p.p_plus * c[1] + p.p_minus * c[2]
        })
        .collect();
    let (jumps, band) = product_integrate(&s, h, &BarRLambda { tables, lambda, scale })?;
    let killing = lat.weighted_inner(|y| lambda * tables.killing_integral(scale * y));
    Ok((jumps + killing, band))
}

/// `Ê_λ[u] = ½∬ r̂_λ(y, y′)(u(y′)−u(y))² dy dy′ + ∫ k_λ u²`, the form of the killed jump process.
///
/// Transmitted pairs carry `p̃₊(y′−y)r̄_λ(y′−y)`, mirrored same-side pairs `p̃₋(|y|+|y′|)r̄_λ(|y|+|y′|)`.
pub fn lambda_form(u: &GridFunction, m: &Model, lambda: f64) -> Result<FormReport, FormError> {
    refined(u, u, None, |a, _| lambda_single(a, m, lambda))
}

/// `Ê_λ[u]` on a single grid, without the refinement check.
pub fn lambda_form_single(u: &GridFunction, m: &Model, lambda: f64) -> Result<f64, FormError> {
    Ok(lambda_single(u, m, lambda)?.0)
}

/// `min_y k_λ(y)·(λ^{−1/α}+|y|)^α·[1+log(1+λ^{1/α}|y|)]^κ` over nonzero grid points: the tracked
/// constant of the killing lower bound.
pub fn killing_lower_constant(m: &Model, lambda: f64, ys: &[f64]) -> f64 {
    let alpha = m.alpha();
    let scale = lambda.powf(1.0 / alpha);
    let kappa = m.params().kappa;
    let tables = m.jump_tables();
    ys.iter()
        .filter(|y| **y != 0.0)
        .map(|&y| {
            let k = lambda * tables.killing_integral(scale * y);
            let bound = (1.0 + (1.0 + scale * y.abs()).ln()).powf(-kappa) / (1.0 / scale + y.abs()).powf(alpha);
            k / bound
        })
        .fold(f64::INFINITY, f64::min)
}
