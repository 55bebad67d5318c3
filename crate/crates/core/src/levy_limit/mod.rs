//! The auxiliary jump process `Ẑ°_λ`, the limiting interface stable process `ζ°`, their killed
//! semigroups and the Lévy-symbol and path-regularity diagnostics.

mod hat_z;
mod modulus;
mod symbol;
mod zeta;

use std::collections::VecDeque;

use rand::RngCore;
use rayon::prelude::*;
use thiserror::Error;

use crate::grid::GridFunction;
use crate::model::Model;
use crate::numerics::sum::mean_and_stderr;
use crate::rng::{sample_rng, unit, SampleRng};

pub use hat_z::{sample_hat_z_o, sample_hat_z_o_times, sample_hat_z_pair_times, sample_hat_z_paths, HatZPoint, JumpKernelTable};
pub use modulus::{d_modulus, StepPath};
pub use symbol::{
    levy_symbol, levy_symbol_kspace, symbol_bounds, theta_star, theta_star_with, SymbolBounds,
    ThetaProfile,
};
pub use zeta::{
    sample_stable_increment, sample_zeta_o, sample_zeta_o_times, standard_stable, ExtrapolatedLaw,
    StablePathConfig, ZetaOutcome,
};

/// Maximum number of jumps of one `Ẑ°_λ` trajectory.
pub const HAT_Z_JUMP_BUDGET: u64 = 1_000_000_000;
/// Maximum number of grid steps of one `ζ°` trajectory.
pub const ZETA_STEP_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("thinning acceptance ratio {ratio} exceeds 1")]
    RateEnvelopeViolation { ratio: f64 },
    #[error("trajectory exceeded the budget of {budget} jumps")]
    PathBudgetExceeded { budget: u64 },
    #[error("step grid cannot resolve the path (step fraction {step_fraction}, tolerance {kill_tolerance})")]
    StepResolutionTooCoarse { step_fraction: f64, kill_tolerance: f64 },
    #[error("starting position must be nonzero")]
    ZeroStart,
    #[error("query times must be finite and nondecreasing")]
    InvalidTimes,
    #[error("invalid stable path configuration")]
    InvalidConfig,
    #[error("test functions need compact support")]
    EmptySupport,
    #[error("quadrature failure: {0}")]
    Quadrature(String),
}

/// A killed process on the line that can be sampled at a fixed time.
pub trait InterfaceSampler: Sync {
    /// Position at time `t` started from `y`, or `None` if killed by then.
    fn sample(&self, rng: &mut SampleRng, t: f64, y: f64) -> Result<Option<f64>, LevyError>;

    /// Positions along one trajectory at nondecreasing times, `None` once killed.
    fn sample_times(&self, rng: &mut SampleRng, times: &[f64], y: f64) -> Result<Vec<Option<f64>>, LevyError>;
}

/// `Ẑ°_λ` for a given model and `λ`.
#[derive(Clone, Copy, Debug)]
pub struct HatZProcess<'a> {
    pub model: &'a Model,
    pub lambda: f64,
}

impl InterfaceSampler for HatZProcess<'_> {
    fn sample(&self, rng: &mut SampleRng, t: f64, y: f64) -> Result<Option<f64>, LevyError> {
        sample_hat_z_o(rng, self.model, self.lambda, t, y)
    }

    fn sample_times(&self, rng: &mut SampleRng, times: &[f64], y: f64) -> Result<Vec<Option<f64>>, LevyError> {
        let pts = sample_hat_z_o_times(rng, self.model, self.lambda, times, y)?;
        Ok(pts.into_iter().map(|p| (!p.killed).then_some(p.position)).collect())
    }
}

/// `ζ°` for a given configuration.
#[derive(Clone, Debug)]
pub struct ZetaProcess {
    pub config: StablePathConfig,
}

impl InterfaceSampler for ZetaProcess {
    fn sample(&self, rng: &mut SampleRng, t: f64, y: f64) -> Result<Option<f64>, LevyError> {
        let o = sample_zeta_o(rng, &self.config, t, y)?;
        Ok((!o.killed).then_some(o.position))
    }

    fn sample_times(&self, rng: &mut SampleRng, times: &[f64], y: f64) -> Result<Vec<Option<f64>>, LevyError> {
        let outs = sample_zeta_o_times(rng, &self.config, times, y)?;
        Ok(outs.into_iter().map(|o| (!o.killed).then_some(o.position)).collect())
    }
}

/// Monte Carlo semigroup values with standard errors at the nodes of a query grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupEstimate {
    pub values: GridFunction,
    pub stderr: Vec<f64>,
}

/// `P_t u(y) = 𝔼[u(Z(t, y)), t < killing]` at each node of `query`; killed paths contribute 0.
///
/// Sample `i` at node `j` uses the generator `(seed, j, i)`. The interface node `y = 0` is a
/// trap, so its value is 0.
pub fn semigroup_apply<S: InterfaceSampler + ?Sized>(
    sampler: &S,
    u: &GridFunction,
    t: f64,
    query: &GridFunction,
    n: usize,
    seed: u64,
) -> Result<SemigroupEstimate, LevyError> {
    expectation(sampler, |z| u.eval(z), t, query, n, seed)
}

fn expectation<S: InterfaceSampler + ?Sized, F: Fn(f64) -> f64 + Sync>(
    sampler: &S,
    f: F,
    t: f64,
    query: &GridFunction,
    n: usize,
    seed: u64,
) -> Result<SemigroupEstimate, LevyError> {
    let mut values = Vec::with_capacity(query.len());
    let mut stderr = Vec::with_capacity(query.len());
    for j in 0..query.len() {
        let y = query.node(j);
        if y == 0.0 {
            values.push(0.0);
            stderr.push(0.0);
            continue;
        }
        let samples: Result<Vec<f64>, LevyError> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(seed, j as u64, i as u64);
                Ok(sampler.sample(&mut rng, t, y)?.map_or(0.0, &f))
            })
            .collect();
        let (m, s) = mean_and_stderr(&samples?);
        values.push(m);
        stderr.push(s);
    }
    Ok(SemigroupEstimate {
        values: GridFunction::new(query.origin, query.spacing, values),
        stderr,
    })
}

/// Survival probabilities `P(t < killing)` from each node of `grid`.
pub fn survival_curve<S: InterfaceSampler + ?Sized>(
    sampler: &S,
    t: f64,
    grid: &GridFunction,
    n: usize,
    seed: u64,
) -> Result<SemigroupEstimate, LevyError> {
    expectation(sampler, |_| 1.0, t, grid, n, seed)
}

/// `|⟨P_t u, v⟩ − ⟨u, P_t v⟩|` with its Monte Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryDefect {
    pub forward: f64,
    pub backward: f64,
    pub defect: f64,
    pub stderr: f64,
}

/// Estimates both pairings with common randomness: sample `i` draws one level `U`, starts at
/// `Y = a + U(b − a)` in the support of `v` (resp. `u`) and weights by `|supp|·v(Y)·u(Z(t, Y))`
/// (resp. with `u`, `v` exchanged), reusing the same generator state for both paths.
pub fn symmetry_defect<S: InterfaceSampler + ?Sized>(
    sampler: &S,
    u: &GridFunction,
    v: &GridFunction,
    t: f64,
    n: usize,
    seed: u64,
) -> Result<SymmetryDefect, LevyError> {
    let (ua, ub) = u.support().ok_or(LevyError::EmptySupport)?;
    let (va, vb) = v.support().ok_or(LevyError::EmptySupport)?;
    let pairs: Result<Vec<(f64, f64)>, LevyError> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, 0, i as u64);
            let level = unit(rng.next_u64());
            let mut rng2 = rng.clone();
            let y1 = va + level * (vb - va);
            let y2 = ua + level * (ub - ua);
            let f = match y1 {
                y if y == 0.0 => 0.0,
                y => (vb - va) * v.eval(y) * sampler.sample(&mut rng, t, y)?.map_or(0.0, |z| u.eval(z)),
            };
            let b = match y2 {
                y if y == 0.0 => 0.0,
                y => (ub - ua) * u.eval(y) * sampler.sample(&mut rng2, t, y)?.map_or(0.0, |z| v.eval(z)),
            };
            Ok((f, b))
        })
        .collect();
    let pairs = pairs?;
    let fw: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let bw: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let (forward, _) = mean_and_stderr(&fw);
    let (backward, _) = mean_and_stderr(&bw);
    let (d, stderr) = mean_and_stderr(&diff);
    Ok(SymmetryDefect { forward, backward, defect: d.abs(), stderr })
}

/// Weighted `L¹` distance `Σ f(y_j)|a_j − b_j| h` between two curves on the same grid.
pub fn weighted_l1(a: &GridFunction, b: &GridFunction, weight: impl Fn(f64) -> f64) -> f64 {
    let diff = GridFunction::new(
        a.origin,
        a.spacing,
        a.values
            .iter()
            .zip(&b.values)
            .enumerate()
            .map(|(j, (x, y))| weight(a.node(j)) * (x - y).abs())
            .collect(),
    );
    diff.integral()
}

/// Sliding-window extrema used by the D-modulus feasibility scan.
#[derive(Default)]
pub(crate) struct WindowExtrema {
    max: VecDeque<(usize, f64)>,
    min: VecDeque<(usize, f64)>,
}

impl WindowExtrema {
    pub(crate) fn push(&mut self, i: usize, v: f64) {
        while self.max.back().is_some_and(|b| b.1 <= v) {
            self.max.pop_back();
        }
        self.max.push_back((i, v));
        while self.min.back().is_some_and(|b| b.1 >= v) {
            self.min.pop_back();
        }
        self.min.push_back((i, v));
    }

    pub(crate) fn evict_before(&mut self, i: usize) {
        while self.max.front().is_some_and(|f| f.0 < i) {
            self.max.pop_front();
        }
        while self.min.front().is_some_and(|f| f.0 < i) {
            self.min.pop_front();
        }
    }

    pub(crate) fn range(&self) -> f64 {
        match (self.max.front(), self.min.front()) {
            (Some(a), Some(b)) => a.1 - b.1,
            _ => 0.0,
        }
    }
}
