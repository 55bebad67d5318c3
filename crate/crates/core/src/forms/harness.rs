//! Numerical evidence for Γ-convergence of `Ê_λ` to `ℰ° = r̄_*·Ê` (in the `r̄_*|z|^{−1−α}`
//! normalization of the limit jump density).
//!
//! The recovery side uses the constant family `u_λ = u`. The liminf side cannot be checked by an
//! algorithm; the harness only spot-checks perturbed families `u_λ = u + λ^{−1/(2α)}·noise`.

use rand::RngCore;
use serde::Serialize;

use crate::grid::GridFunction;
use crate::levy_limit::StablePathConfig;
use crate::model::{DerivedConstants, Model};
use crate::report::ExperimentReport;
use crate::rng::{sample_rng, unit};

use super::{interface_energy, lambda_form, lambda_form_single, sobolev_energy, FormError, REFINEMENT_RTOL};

/// Recovery gap of one test function at one `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaRow {
    pub function: usize,
    pub lambda: f64,
    pub value: f64,
    pub target: f64,
    pub rel_gap: f64,
}

/// Liminf spot check along one perturbed family member.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiminfRow {
    pub function: usize,
    pub lambda: f64,
    pub perturbed: f64,
    pub target: f64,
    pub holds: bool,
}

/// Ratio `Ê[u]/ℰ_α[u]` with the bracket `[p₊, 1 + p₋]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub function: usize,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaReport {
    pub recovery: Vec<GammaRow>,
    pub liminf: Vec<LiminfRow>,
    pub equivalence: Vec<EquivalenceRow>,
    /// `r̄_*/c_α`, the factor between `ℰ°` and `Ê` written with `q_α`.
    pub limit_factor: f64,
}

impl GammaReport {
    /// Whether the relative gaps of `function` strictly decrease along the `λ` grid.
    pub fn gaps_decrease(&self, function: usize) -> bool {
        let gaps: Vec<f64> =
            self.recovery.iter().filter(|r| r.function == function).map(|r| r.rel_gap).collect();
        gaps.windows(2).all(|w| w[1] < w[0])
    }

    pub fn to_report(&self) -> ExperimentReport {
        let mut r = ExperimentReport::new(
            "gamma",
            &["function", "lambda", "form_lambda", "limit_form", "rel_gap", "perturbed_form", "liminf_holds"],
        );
        for (row, li) in self.recovery.iter().zip(&self.liminf) {
            r.push(vec![
                row.function as f64,
                row.lambda,
                row.value,
                row.target,
                row.rel_gap,
                li.perturbed,
                li.holds as u8 as f64,
            ]);
        }
        r.note("limit_factor", self.limit_factor);
        for e in &self.equivalence {
            r.note(&format!("equivalence_ratio_{}", e.function), format!("{} in [{}, {}]", e.ratio, e.lower, e.upper));
        }
        r
    }
}

/// Runs the recovery, liminf and equivalence checks for each function of `family` (all with
/// `u(0) = 0`) along `lambdas`.
pub fn gamma_harness(
    m: &Model,
    constants: &DerivedConstants,
    family: &[GridFunction],
    lambdas: &[f64],
    seed: u64,
) -> Result<GammaReport, FormError> {
    let alpha = m.alpha();
    let limit = StablePathConfig::from_model(m, constants);
    let (p_plus, p_minus) = (limit.p_plus, limit.p_minus);
    let limit_factor = constants.r_bar_star / constants.c_alpha;
    let mut report = GammaReport { recovery: vec![], liminf: vec![], equivalence: vec![], limit_factor };
    for (f, u) in family.iter().enumerate() {
        let hat = interface_energy(u, alpha, p_plus, p_minus)?.value;
        let plain = sobolev_energy(u, alpha)?.value;
        report.equivalence.push(EquivalenceRow {
            function: f,
            ratio: if plain > 0.0 { hat / plain } else { 0.0 },
            lower: p_plus,
            upper: 1.0 + p_minus,
        });
        let target = limit_factor * hat;
        for (l, &lambda) in lambdas.iter().enumerate() {
            let value = lambda_form(u, m, lambda)?.value;
            let rel_gap = if target > 0.0 { (value - target).abs() / target } else { value.abs() };
            report.recovery.push(GammaRow { function: f, lambda, value, target, rel_gap });

            let perturbed = perturb(u, lambda.powf(-0.5 / alpha), seed, f as u64, l as u64);
            let pv = lambda_form_single(&perturbed, m, lambda)?;
            report.liminf.push(LiminfRow {
                function: f,
                lambda,
                perturbed: pv,
                target,
                holds: pv >= target * (1.0 - REFINEMENT_RTOL) - 1e-13,
            });
        }
    }
    Ok(report)
}

/// `u + amplitude·max|u|·ξ` with independent `ξ ~ U(−1, 1)` on the support of `u`, keeping `u(0) = 0`.
fn perturb(u: &GridFunction, amplitude: f64, seed: u64, function: u64, level: u64) -> GridFunction {
    let mut rng = sample_rng(seed, function, level);
    let scale = amplitude * u.max_abs();
    let zero = u.interface_index();
    let values = u
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let xi = 2.0 * unit(rng.next_u64()) - 1.0;
            if v == 0.0 || Some(i) == zero {
                v
            } else {
                v + scale * xi
            }
        })
        .collect();
    GridFunction::new(u.origin, u.spacing, values)
}
