//! Weak solution of the limit interface equation through its probabilistic representation, the
//! residual of the weak formulation, and the kinetic-versus-limit comparison.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{interface_form_single, FormError};
use crate::grid::GridFunction;
use crate::kinetic_mc::{sample_y_o, KineticError};
use crate::levy_limit::{InterfaceSampler, LevyError, StablePathConfig};
use crate::model::{DerivedConstants, Model};
use crate::numerics::sum::{mean_and_stderr, CompensatedSum};
use crate::report::ExperimentReport;
use crate::rng::{sample_rng, unit};
use crate::stats::{median, EmpiricalMeasure, StatsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("test function and field live on different grids")]
    GridMismatch,
    #[error("inconsistent initial data: {0}")]
    InconsistentInitialData(String),
    #[error("time grid must start at 0 and be strictly increasing")]
    InvalidTimes,
    #[error(transparent)]
    Levy(#[from] LevyError),
    #[error(transparent)]
    Kinetic(#[from] KineticError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Coefficients of the limit problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitProblem {
    pub alpha: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    /// Time change `θ̄`: the solution is `W̄(t) = P°_{θ̄t} W̄₀`.
    pub theta_bar: f64,
    /// Interface temperature.
    pub t_o: f64,
    /// Far-field value of the initial data.
    pub t_inf: f64,
}

impl LimitProblem {
    /// Limit coefficients of `m`, with `T_∞ = T_o`.
    pub fn from_model(m: &Model, constants: &DerivedConstants) -> Self {
        let cfg = StablePathConfig::from_model(m, constants);
        Self {
            alpha: constants.alpha,
            p_plus: cfg.p_plus,
            p_minus: cfg.p_minus,
            theta_bar: constants.theta_bar,
            t_o: m.params().t_o,
            t_inf: m.params().t_o,
        }
    }
}

/// Initial data `W̄₀ = T_∞ + offset`, with `offset` extended by zero off its grid.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    pub offset: GridFunction,
    pub t_inf: f64,
}

impl InitialData {
    pub fn eval(&self, y: f64) -> f64 {
        self.t_inf + self.offset.eval(y)
    }

    /// Rejects data that do not vanish at the grid ends relative to `T_∞` or miss `W̄₀(0) = T_o`.
    pub fn validate(&self, problem: &LimitProblem) -> Result<(), SolverError> {
        let tol = 1e-9 * (1.0 + self.offset.max_abs());
        if (self.t_inf - problem.t_inf).abs() > tol {
            return Err(SolverError::InconsistentInitialData(format!(
                "far field {} differs from T_∞ = {}",
                self.t_inf, problem.t_inf
            )));
        }
        let ends = [self.offset.values.first(), self.offset.values.last()];
        if ends.iter().any(|v| v.is_some_and(|v| v.abs() > tol)) {
            return Err(SolverError::InconsistentInitialData(
                "W̄₀ − T_∞ must vanish at both ends of its grid".into(),
            ));
        }
        let at_zero = self.eval(0.0);
        if (at_zero - problem.t_o).abs() > tol {
            return Err(SolverError::InconsistentInitialData(format!(
                "W̄₀(0) = {at_zero} differs from T_o = {}",
                problem.t_o
            )));
        }
        Ok(())
    }
}

/// Monte Carlo field `W̄(t_i, y_j)` with standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakSolutionField {
    pub problem: LimitProblem,
    pub times: Vec<f64>,
    pub values: Vec<GridFunction>,
    pub stderr: Vec<Vec<f64>>,
    pub samples: usize,
}

impl WeakSolutionField {
    /// `W̄(t_i) − T_∞` as a grid function, decaying at infinity.
    fn centered(&self, i: usize) -> GridFunction {
        let g = &self.values[i];
        GridFunction::new(g.origin, g.spacing, g.values.iter().map(|v| v - self.problem.t_inf).collect())
    }

    /// CSV-ready rows `(t, y, mean, stderr)`.
    pub fn to_report(&self) -> ExperimentReport {
        let mut r = ExperimentReport::new("solve", &["t", "y", "mean", "stderr"]);
        for (i, &t) in self.times.iter().enumerate() {
            let g = &self.values[i];
            for j in 0..g.len() {
                r.push(vec![t, g.node(j), g.values[j], self.stderr[i][j]]);
            }
        }
        r.note("samples", self.samples);
        r
    }
}

/// `W̄(t, y) = 𝔼[W̄₀(η°(t, y))]` with `η°(t, y) = Z(θ̄t, y)` and killed paths contributing `T_o`.
///
/// Each path is sampled once along all of `times`; sample `i` at node `j` uses the generator
/// `(seed, j, i)`. The node `y = 0` carries `T_o`.
pub fn solve_limit_mc<S: InterfaceSampler + ?Sized>(
    sampler: &S,
    problem: &LimitProblem,
    w0: &InitialData,
    times: &[f64],
    x_grid: &GridFunction,
    n: usize,
    seed: u64,
) -> Result<WeakSolutionField, SolverError> {
    w0.validate(problem)?;
    if times.first() != Some(&0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SolverError::InvalidTimes);
    }
    let scaled: Vec<f64> = times.iter().map(|t| problem.theta_bar * t).collect();
    let nt = times.len();
    let mut columns: Vec<Vec<(f64, f64)>> = Vec::with_capacity(x_grid.len());
    for j in 0..x_grid.len() {
        let y = x_grid.node(j);
        if y == 0.0 {
            columns.push(vec![(problem.t_o, 0.0); nt]);
            continue;
        }
        let paths: Result<Vec<Vec<f64>>, LevyError> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(seed, j as u64, i as u64);
                let pos = sampler.sample_times(&mut rng, &scaled, y)?;
                Ok(pos.into_iter().map(|p| p.map_or(problem.t_o, |z| w0.eval(z))).collect())
            })
            .collect();
        let paths = paths?;
        let col = (0..nt)
            .map(|ti| {
                if times[ti] == 0.0 {
                    return (w0.eval(y), 0.0);
                }
                let vals: Vec<f64> = paths.iter().map(|p| p[ti]).collect();
                mean_and_stderr(&vals)
            })
            .collect();
        columns.push(col);
    }
    let values = (0..nt)
        .map(|ti| {
            GridFunction::new(x_grid.origin, x_grid.spacing, columns.iter().map(|c| c[ti].0).collect())
        })
        .collect();
    let stderr = (0..nt).map(|ti| columns.iter().map(|c| c[ti].1).collect()).collect();
    Ok(WeakSolutionField { problem: problem.clone(), times: times.to_vec(), values, stderr, samples: n })
}

/// Time factor `φ` of a separable test function `F(s, y) = φ(s)ψ(y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    Constant,
    /// `e^{−rate·s}`.
    Exponential { rate: f64 },
    /// `cos(frequency·s)`.
    Cosine { frequency: f64 },
}

impl TimeProfile {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Exponential { rate } => (-rate * s).exp(),
            TimeProfile::Cosine { frequency } => (frequency * s).cos(),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 0.0,
            TimeProfile::Exponential { rate } => -rate * (-rate * s).exp(),
            TimeProfile::Cosine { frequency } => -frequency * (frequency * s).sin(),
        }
    }
}

/// Separable test function `F(s, y) = φ(s)ψ(y)` with `ψ` on the field grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub space: GridFunction,
    pub time: TimeProfile,
}

/// Terms of the weak identity on `[s₀, s₁]`:
/// `initial = final − time_derivative + γ̄·form` for the exact solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeakTerms {
    /// `∫F(s₀)(W̄(s₀) − T_o)`.
    pub initial: f64,
    /// `∫F(s₁)(W̄(s₁) − T_o)`.
    pub terminal: f64,
    /// `∫_{s₀}^{s₁}∫∂_sF (W̄ − T_o)`.
    pub time_derivative: f64,
    /// `∫_{s₀}^{s₁} Ê[F(s), W̄(s) − T_o] ds`.
    pub form: f64,
}

impl WeakTerms {
    /// Signed defect `initial − terminal + time_derivative − γ̄·form`.
    pub fn defect(&self, gamma_bar: f64) -> f64 {
        self.initial - self.terminal + self.time_derivative - gamma_bar * self.form
    }

    /// Defect divided by the largest of the four terms.
    pub fn residual(&self, gamma_bar: f64) -> f64 {
        let scale = self
            .initial
            .abs()
            .max(self.terminal.abs())
            .max(self.time_derivative.abs())
            .max((gamma_bar * self.form).abs());
        if scale == 0.0 {
            0.0
        } else {
            self.defect(gamma_bar) / scale
        }
    }

    /// Coefficient that zeroes the defect.
    pub fn root(&self) -> f64 {
        (self.initial - self.terminal + self.time_derivative) / self.form
    }
}

/// Weak-identity terms between time indices `i0 < i1` of the field (trapezoid in time).
pub fn weak_terms(field: &WeakSolutionField, f: &TestFunction, i0: usize, i1: usize) -> Result<WeakTerms, SolverError> {
    if i0 >= i1 || i1 >= field.times.len() {
        return Err(SolverError::InvalidTimes);
    }
    if !f.space.same_grid(&field.values[0]) {
        return Err(SolverError::GridMismatch);
    }
    let p = &field.problem;
    let pairing = |i: usize| -> f64 {
        let w = &field.values[i];
        let shifted = GridFunction::new(w.origin, w.spacing, w.values.iter().map(|v| v - p.t_o).collect());
        let prod = GridFunction::new(
            w.origin,
            w.spacing,
            shifted.values.iter().zip(&f.space.values).map(|(a, b)| a * b).collect(),
        );
        prod.integral()
    };
    let forms: Result<Vec<f64>, FormError> = (i0..=i1)
        .into_par_iter()
        .map(|i| interface_form_single(&f.space, &field.centered(i), p.alpha, p.p_plus, p.p_minus))
        .collect();
    let forms = forms?;
    let mut dt_sum = CompensatedSum::new();
    let mut form_sum = CompensatedSum::new();
    for i in i0..i1 {
        let (a, b) = (field.times[i], field.times[i + 1]);
        let h = b - a;
        dt_sum.add(0.5 * h * (f.time.derivative(a) * pairing(i) + f.time.derivative(b) * pairing(i + 1)));
        form_sum.add(0.5 * h * (f.time.value(a) * forms[i - i0] + f.time.value(b) * forms[i + 1 - i0]));
    }
    Ok(WeakTerms {
        initial: f.time.value(field.times[i0]) * pairing(i0),
        terminal: f.time.value(field.times[i1]) * pairing(i1),
        time_derivative: dt_sum.value(),
        form: form_sum.value(),
    })
}

/// Normalized defect of the weak identity on the full time range of the field.
pub fn weak_residual(field: &WeakSolutionField, f: &TestFunction, gamma_bar: f64) -> Result<f64, SolverError> {
    Ok(weak_terms(field, f, 0, field.times.len() - 1)?.residual(gamma_bar))
}

/// Result of sweeping the diffusion coefficient over a candidate grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientSweep {
    pub candidates: Vec<f64>,
    /// `max_F |residual_F(γ̄)|` over the test bank.
    pub residuals: Vec<f64>,
    pub best: f64,
    pub best_residual: f64,
    /// Per-test-function zero of the defect.
    pub roots: Vec<f64>,
}

/// Sweeps `γ̄` over `candidates` and keeps the value minimizing the worst normalized residual.
pub fn coefficient_sweep(
    field: &WeakSolutionField,
    bank: &[TestFunction],
    candidates: &[f64],
) -> Result<CoefficientSweep, SolverError> {
    let last = field.times.len() - 1;
    let terms: Result<Vec<WeakTerms>, SolverError> = bank.iter().map(|f| weak_terms(field, f, 0, last)).collect();
    let terms = terms?;
    let residuals: Vec<f64> = candidates
        .iter()
        .map(|&g| terms.iter().map(|t| t.residual(g).abs()).fold(0.0, f64::max))
        .collect();
    let (bi, &best_residual) = residuals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(SolverError::InvalidTimes)?;
    Ok(CoefficientSweep {
        candidates: candidates.to_vec(),
        residuals,
        best: candidates[bi],
        best_residual,
        roots: terms.iter().map(WeakTerms::root).collect(),
    })
}

/// Settings of the kinetic-versus-limit comparison at one point `(t, y, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    pub lambdas: Vec<f64>,
    pub t: f64,
    pub y: f64,
    pub k: f64,
    pub samples_per_block: usize,
    pub blocks: usize,
    /// `λ` of the `Ẑ°_λ` proxy for `η°`.
    pub reference_lambda: f64,
    pub reference_samples: usize,
    pub seed: u64,
}

/// One block of the comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub lambda: f64,
    pub block: usize,
    pub ks: f64,
    pub wasserstein: f64,
    pub killed_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub reference_killed_fraction: f64,
}

impl ComparisonReport {
    /// `(λ, median KS, median W₁)` per `λ`, in the order of first appearance.
    pub fn medians(&self) -> Vec<(f64, f64, f64)> {
        let mut lambdas: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !lambdas.contains(&r.lambda) {
                lambdas.push(r.lambda);
            }
        }
        lambdas
            .into_iter()
            .map(|l| {
                let ks: Vec<f64> = self.rows.iter().filter(|r| r.lambda == l).map(|r| r.ks).collect();
                let w: Vec<f64> = self.rows.iter().filter(|r| r.lambda == l).map(|r| r.wasserstein).collect();
                (l, median(&ks), median(&w))
            })
            .collect()
    }

    /// Whether the median KS distance strictly decreases along the `λ` grid.
    pub fn ks_medians_decrease(&self) -> bool {
        self.medians().windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn to_report(&self) -> ExperimentReport {
        let mut r = ExperimentReport::new("compare", &["lambda", "ks", "wasserstein"]);
        for (l, ks, w) in self.medians() {
            r.push(vec![l, ks, w]);
        }
        r.note("reference_killed_fraction", self.reference_killed_fraction);
        r
    }
}

/// Positions of `Y°_λ(t, y, k)` with absorbed paths at 0, generators `(seed, stream, i)`.
pub fn kinetic_sample(
    m: &Model,
    lambda: f64,
    t: f64,
    y: f64,
    k: f64,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<f64>, SolverError> {
    let out: Result<Vec<f64>, KineticError> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, stream, i as u64);
            Ok(sample_y_o(&mut rng, m, lambda, t, y, k)?.position)
        })
        .collect();
    Ok(out?)
}

/// Positions of `η°(t, y) = Z(θ̄t, y)` with killed paths at 0, generators `(seed, stream, i)`.
pub fn limit_sample<S: InterfaceSampler + ?Sized>(
    sampler: &S,
    theta_bar: f64,
    t: f64,
    y: f64,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<f64>, SolverError> {
    let out: Result<Vec<f64>, LevyError> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, stream, i as u64);
            Ok(sampler.sample(&mut rng, theta_bar * t, y)?.unwrap_or(0.0))
        })
        .collect();
    Ok(out?)
}

fn killed_fraction(xs: &[f64]) -> f64 {
    xs.iter().filter(|x| **x == 0.0).count() as f64 / xs.len().max(1) as f64
}

/// Stream index of reference samples.
pub const REFERENCE_STREAM: u64 = 1 << 40;

/// KS and `W₁` distances between `law(Y°_λ(t, y, k))` and a reference sample of `law(η°(t, y))`,
/// per `λ` and seed block. Block `b` at grid index `l` uses stream `l·2^20 + b`.
pub fn kinetic_vs_reference(
    m: &Model,
    cfg: &ComparisonConfig,
    reference: &[f64],
) -> Result<ComparisonReport, SolverError> {
    let reference_measure = EmpiricalMeasure::new(reference.to_vec())?;
    let mut rows = Vec::new();
    for (l, &lambda) in cfg.lambdas.iter().enumerate() {
        for b in 0..cfg.blocks {
            let stream = ((l as u64) << 20) + b as u64;
            let xs = kinetic_sample(m, lambda, cfg.t, cfg.y, cfg.k, cfg.samples_per_block, cfg.seed, stream)?;
            let kf = killed_fraction(&xs);
            let e = EmpiricalMeasure::new(xs)?;
            rows.push(ComparisonRow {
                lambda,
                block: b,
                ks: e.ks_distance(&reference_measure),
                wasserstein: e.wasserstein1(&reference_measure),
                killed_fraction: kf,
            });
        }
    }
    Ok(ComparisonReport { rows, reference_killed_fraction: killed_fraction(reference) })
}

/// Full comparison with a freshly drawn `Ẑ°_{λ_ref}` reference sample.
pub fn kinetic_vs_limit(
    m: &Model,
    constants: &DerivedConstants,
    cfg: &ComparisonConfig,
) -> Result<ComparisonReport, SolverError> {
    let proxy = crate::levy_limit::HatZProcess { model: m, lambda: cfg.reference_lambda };
    let reference =
        limit_sample(&proxy, constants.theta_bar, cfg.t, cfg.y, cfg.reference_samples, cfg.seed, REFERENCE_STREAM)?;
    kinetic_vs_reference(m, cfg, &reference)
}

/// Frequency factor `g(k)` of a pairing test function `F(y, k) = f(y)g(k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyWeight {
    One,
    /// `2sin²(πk)`, unit mass on the torus.
    SinSquared,
}

impl FrequencyWeight {
    pub fn value(&self, k: f64) -> f64 {
        match self {
            FrequencyWeight::One => 1.0,
            FrequencyWeight::SinSquared => 2.0 * (std::f64::consts::PI * k).sin().powi(2),
        }
    }
}

/// `∫∫W_λ(t, y, k)F(y, k) dk dy` and `∫∫W̄(t, y)F(y, k) dk dy` with standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pairing {
    pub lambda: f64,
    pub kinetic: f64,
    pub kinetic_stderr: f64,
    pub limit: f64,
    pub limit_stderr: f64,
}

/// Pairings for one test function. Each sample draws `y` uniformly on the support of `f` and `k`
/// uniformly on the torus; absorbed or killed paths contribute `T_o`.
#[allow(clippy::too_many_arguments)]
pub fn pairings<S: InterfaceSampler + ?Sized>(
    m: &Model,
    limit: &S,
    problem: &LimitProblem,
    w0: &InitialData,
    f: &GridFunction,
    g: FrequencyWeight,
    lambdas: &[f64],
    t: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<Pairing>, SolverError> {
    let (a, b) = f.support().ok_or(LevyError::EmptySupport)?;
    let width = b - a;
    let draw = |rng: &mut crate::rng::SampleRng| {
        let y = a + width * unit(rng.next_u64());
        let k = unit(rng.next_u64()) - 0.5;
        (y, k, width * f.eval(y) * g.value(k))
    };
    let limit_vals: Result<Vec<f64>, LevyError> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, REFERENCE_STREAM + 1, i as u64);
            let (y, _, wgt) = draw(&mut rng);
            if y == 0.0 || wgt == 0.0 {
                return Ok(wgt * problem.t_o);
            }
            let v = limit.sample(&mut rng, problem.theta_bar * t, y)?.map_or(problem.t_o, |z| w0.eval(z));
            Ok(wgt * v)
        })
        .collect();
    let (lm, ls) = mean_and_stderr(&limit_vals?);
    let t_o = m.params().t_o;
    lambdas
        .iter()
        .enumerate()
        .map(|(l, &lambda)| {
            let vals: Result<Vec<f64>, KineticError> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(seed, l as u64, i as u64);
                    let (y, k, wgt) = draw(&mut rng);
                    if y == 0.0 || wgt == 0.0 {
                        return Ok(wgt * t_o);
                    }
                    let s = sample_y_o(&mut rng, m, lambda, t, y, k)?;
                    Ok(wgt * if s.absorbed { t_o } else { w0.eval(s.position) })
                })
                .collect();
            let (km, ks) = mean_and_stderr(&vals?);
            Ok(Pairing { lambda, kinetic: km, kinetic_stderr: ks, limit: lm, limit_stderr: ls })
        })
        .collect()
}
