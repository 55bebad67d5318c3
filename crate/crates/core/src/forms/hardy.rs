//! Hardy ratios `∫u²|y|^{−β} / ‖u‖²_{H^{β/2}}`.

use serde::Serialize;

use crate::grid::GridFunction;
use crate::numerics::sum::CompensatedSum;

use super::{sobolev_energy, FormError};

/// Hardy ratio with its refinement data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyReport {
    pub ratio: f64,
    /// Ratio on the grid of spacing `2h`.
    pub coarse_ratio: f64,
    pub numerator: f64,
    /// `‖u‖²_{H^{β/2}} = ‖u‖²_{L²} + ℰ_β[u]`.
    pub norm_sq: f64,
}

/// `‖u‖²_{L²} + ℰ_β[u]`.
pub fn sobolev_norm_sq(u: &GridFunction, beta: f64) -> Result<f64, FormError> {
    Ok(l2_sq(u) + sobolev_energy(u, beta)?.value)
}

fn l2_sq(u: &GridFunction) -> f64 {
    let mut s = CompensatedSum::new();
    for v in &u.values {
        s.add(v * v);
    }
    u.spacing * s.value()
}

/// `∫u²/|y|^β` without the two cells next to the interface (trapezoid on `|y| ≥ h`).
fn outer_numerator(u: &GridFunction, z0: usize, beta: f64) -> f64 {
    let h = u.spacing;
    let mut s = CompensatedSum::new();
    for (i, v) in u.values.iter().enumerate() {
        if i == z0 || *v == 0.0 {
            continue;
        }
        let w = if i + 1 == z0 || i == z0 + 1 { 0.5 } else { 1.0 };
        s.add(w * v * v * u.node(i).abs().powf(-beta));
    }
    h * s.value()
}

/// Numerator with the core cells `[−h, h]` integrated under the local linear bound
/// `|u(y)| ≈ |u(±h)||y|/h`, valid when `u(0) = 0`.
fn numerator(u: &GridFunction, beta: f64) -> Result<f64, FormError> {
    let z0 = u.interface_index().ok_or(FormError::InterfaceNotOnGrid)?;
    let h = u.spacing;
    let side = |i: Option<usize>| i.and_then(|i| u.values.get(i)).copied().unwrap_or(0.0);
    let (left, right) = (side(z0.checked_sub(1)), side(Some(z0 + 1)));
    let core = (left * left + right * right) * h.powf(1.0 - beta) / (3.0 - beta);
    Ok(outer_numerator(u, z0, beta) + core)
}

/// Hardy ratio `(∫u²/|y|^β dy) / ‖u‖²_{H^{β/2}}` for `u(0) = 0`, `β ∈ (0, 2)`, `β ≠ 1`.
///
/// Fails with `DivergentNumerator` when `u(0) ≠ 0`, reporting the numerator without its core at
/// spacings `h` and `2h` to exhibit the growth under refinement.
pub fn hardy_ratio(u: &GridFunction, beta: f64) -> Result<HardyReport, FormError> {
    if !(beta > 0.0 && beta < 2.0) || beta == 1.0 {
        return Err(FormError::InvalidExponent { beta });
    }
    let z0 = u.interface_index().ok_or(FormError::InterfaceNotOnGrid)?;
    let u0 = u.values[z0];
    if u0.abs() > 1e-12 * u.max_abs() {
        let coarse = u.coarsen();
        let cz = coarse.interface_index().ok_or(FormError::InterfaceNotOnGrid)?;
        return Err(FormError::DivergentNumerator {
            interface_value: u0,
            numerator: outer_numerator(u, z0, beta) + 0.5 * u0 * u0 * u.spacing.powf(1.0 - beta),
            coarse: outer_numerator(&coarse, cz, beta) + 0.5 * u0 * u0 * coarse.spacing.powf(1.0 - beta),
        });
    }
    let num = numerator(u, beta)?;
    let norm_sq = sobolev_norm_sq(u, beta)?;
    let coarse = u.coarsen();
    let coarse_ratio = numerator(&coarse, beta)? / (l2_sq(&coarse) + sobolev_energy(&coarse, beta)?.value);
    Ok(HardyReport { ratio: num / norm_sq, coarse_ratio, numerator: num, norm_sq })
}
