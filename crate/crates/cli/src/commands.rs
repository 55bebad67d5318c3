//! Subcommands. Each one reads the configuration, applies flag overrides, runs one experiment
//! and writes one output schema.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kinetic_interface::forms::{
    gamma_harness, hardy_ratio, interface_energy, lambda_form, s_sequence, sobolev_energy, sobolev_norm_sq, FormError,
};
use kinetic_interface::grid::GridFunction;
use kinetic_interface::kinetic_mc::{sample_y_o, KineticState};
use kinetic_interface::levy_limit::{
    levy_symbol, theta_star, HatZProcess, InterfaceSampler, LevyError, StablePathConfig, ZetaProcess,
};
use kinetic_interface::model::{derived_constants, validate_params, DerivedConstants, ValidatedModel};
use kinetic_interface::numerics::sum::CompensatedSum;
use kinetic_interface::report::ExperimentReport;
use kinetic_interface::rng::sample_rng;
use kinetic_interface::solver::{kinetic_vs_limit, solve_limit_mc, ComparisonConfig, InitialData, LimitProblem};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{config_hash, parse_config, ExperimentConfig, DEFAULT_CONFIG};
use crate::error::{CliError, EXIT_OK, EXIT_VALIDATION};
use crate::output::{append_log, log_path, write_csv, write_json, LogRecord, Provenance};
use crate::values::{lambda_grid, log_grid, space_grid, time_grid, FunctionSpec};

/// Environment variable holding the number of worker threads. It never changes results.
pub const WORKERS_ENV: &str = "IFLAB_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "iflab", version, about = "Kinetic interface transport experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the model hypotheses and report the derived constants as JSON.
    Validate(ValidateArgs),
    /// Sample the kinetic interface process `Y°_λ(t, y, k)`.
    SimulateKinetic(KineticArgs),
    /// Sample the auxiliary jump process or the limiting interface stable process.
    SimulateLevy(LevyArgs),
    /// Tabulate the Lévy symbol against its two regime bounds.
    Diagnostics(DiagnosticsArgs),
    /// Evaluate quadratic forms, Hardy ratios, the Γ-convergence harness or the s_m sequence.
    Forms(FormsArgs),
    /// Monte Carlo solution of the limit problem on a space-time grid.
    Solve(SolveArgs),
    /// KS and Wasserstein distances between kinetic and limit marginals along a λ grid.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; the shipped default when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `run.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSONL log; overrides `output.log`.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    /// JSON report path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KineticArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LevyMode {
    /// The auxiliary jump process `Ẑ°_λ`.
    Hatz,
    /// The limiting interface stable process `ζ°`.
    Zeta,
}

#[derive(Debug, Args)]
pub struct LevyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub mode: LevyMode,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Hitting tolerance of the `ζ°` sampler; overrides `run.kill_tolerance`.
    #[arg(long)]
    pub kill_tolerance: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnosticsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Frequencies `lo:hi:count`, logarithmically spaced.
    #[arg(long, default_value = "1e-3:1e5:81")]
    pub symbol_grid: String,
    /// Constant `θ_*` of the bounds; computed from `α` when absent.
    #[arg(long)]
    pub theta_star: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormOp {
    Energy,
    Interface,
    Lambda,
    Hardy,
    Gamma,
    Smseq,
}

/// Test functions used when `--function` is absent; all vanish near the interface.
pub const DEFAULT_FUNCTIONS: [&str; 3] = ["bump:2.5:2", "bump:-3:2.5", "bump:4:3"];

#[derive(Debug, Args)]
pub struct FormsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub op: FormOp,
    /// Quadrature grid `half_width:spacing`.
    #[arg(long, default_value = "8:0.0009765625")]
    pub grid: String,
    /// Test function `bump|tent:center:half_width[:amplitude]`, summands joined by `+`; repeatable.
    #[arg(long = "function", allow_hyphen_values = true)]
    pub functions: Vec<String>,
    /// Comma-separated exponents (energy, hardy); `α` for energy and `1.2,1.4,1.6,1.8` for hardy by default.
    #[arg(long)]
    pub beta: Option<String>,
    /// `λ` of the lambda op; overrides `run.lambda`.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// `λ` grid of the gamma op.
    #[arg(long, default_value = "1e2,1e3,1e4,1e5")]
    pub lambda_grid: String,
    /// Transmission probability for the interface and smseq ops; `p₋ = 1 − p₊`.
    #[arg(long)]
    pub p_plus: Option<f64>,
    /// Number of terms of the smseq op.
    #[arg(long, default_value_t = 50)]
    pub m_max: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplerKind {
    Zeta,
    Hatz,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Initial offset `W̄₀ − T_o`, a function spec vanishing at the interface.
    #[arg(long, default_value = "bump:1.5:1", allow_hyphen_values = true)]
    pub w0: String,
    /// Time grid `end:steps`; overrides `run.t_grid`.
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Space grid `half_width:spacing`; overrides `run.x_grid`.
    #[arg(long)]
    pub x_grid: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum, default_value = "zeta")]
    pub sampler: SamplerKind,
    /// `λ` of the `Ẑ°_λ` sampler.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub kill_tolerance: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated `λ` values; overrides `run.lambda_grid`.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    /// Kinetic samples per block; overrides `run.samples`.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub reference_lambda: Option<f64>,
    #[arg(long)]
    pub reference_samples: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Configuration text, its hash and the parsed document.
pub struct Loaded {
    pub path: Option<PathBuf>,
    pub hash: String,
    pub cfg: ExperimentConfig,
}

pub fn load(path: Option<&Path>) -> Result<Loaded, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let cfg = parse_config(&text)?;
    Ok(Loaded { path: path.map(Path::to_path_buf), hash: config_hash(&text), cfg })
}

fn model(cfg: &ExperimentConfig) -> Result<(ValidatedModel, DerivedConstants), CliError> {
    let m = validate_params(cfg.model.to_params())?;
    let d = derived_constants(&m)?;
    Ok((m, d))
}

/// What a finished run wrote.
pub struct Outcome {
    pub provenance: Provenance,
    pub outputs: Vec<PathBuf>,
    pub summary: Value,
    pub exit_code: i32,
}

fn provenance(subcommand: &str, loaded: &Loaded, seed: u64, params: Value) -> Provenance {
    Provenance { subcommand: subcommand.to_string(), config_sha256: loaded.hash.clone(), seed, params }
}

fn notes(report: &ExperimentReport) -> Value {
    Value::Object(report.notes.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
}

fn finish_csv(prov: Provenance, out: &Path, report: &ExperimentReport, summary: Value) -> Result<Outcome, CliError> {
    write_csv(out, &prov, report)?;
    Ok(Outcome { provenance: prov, outputs: vec![out.to_path_buf()], summary, exit_code: EXIT_OK })
}

/// Runs one subcommand and appends its record to the experiment log.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let start = Instant::now();
    let (common, out) = match &cli.command {
        Command::Validate(a) => (&a.common, a.out.clone()),
        Command::SimulateKinetic(a) => (&a.common, Some(a.out.clone())),
        Command::SimulateLevy(a) => (&a.common, Some(a.out.clone())),
        Command::Diagnostics(a) => (&a.common, Some(a.out.clone())),
        Command::Forms(a) => (&a.common, Some(a.out.clone())),
        Command::Solve(a) => (&a.common, Some(a.out.clone())),
        Command::Compare(a) => (&a.common, Some(a.out.clone())),
    };
    let loaded = load(common.config.as_deref())?;
    let seed = common.seed.unwrap_or(loaded.cfg.run.seed);
    let outcome = match &cli.command {
        Command::Validate(a) => validate(&loaded, seed, a.out.as_deref())?,
        Command::SimulateKinetic(a) => simulate_kinetic(&loaded, seed, a)?,
        Command::SimulateLevy(a) => simulate_levy(&loaded, seed, a)?,
        Command::Diagnostics(a) => diagnostics(&loaded, seed, a)?,
        Command::Forms(a) => forms(&loaded, seed, a)?,
        Command::Solve(a) => solve(&loaded, seed, a)?,
        Command::Compare(a) => compare(&loaded, seed, a)?,
    };
    if let Some(out) = out {
        let log = match &common.log {
            Some(p) => p.clone(),
            None => log_path(&out, loaded.cfg.output.log.as_deref()),
        };
        let mut prov = outcome.provenance.clone();
        if let (Value::Object(map), Some(p)) = (&mut prov.params, &loaded.path) {
            map.insert("config_path".into(), Value::String(p.display().to_string()));
        }
        let record = LogRecord {
            provenance: &prov,
            wall_time_s: start.elapsed().as_secs_f64(),
            exit_code: outcome.exit_code,
            outputs: outcome.outputs.iter().map(|p| p.display().to_string()).collect(),
            summary: outcome.summary.clone(),
        };
        append_log(&log, &record)?;
    }
    Ok(outcome.exit_code)
}

fn validate(loaded: &Loaded, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let prov = provenance("validate", loaded, seed, serde_json::to_value(&loaded.cfg.model).unwrap_or(Value::Null));
    let (body, exit_code) = match validate_params(loaded.cfg.model.to_params()) {
        Ok(m) => {
            let d = derived_constants(&m)?;
            (json!({ "valid": true, "constants": d }), EXIT_OK)
        }
        Err(report) => (json!({ "valid": false, "failures": report.failures }), EXIT_VALIDATION),
    };
    let outputs = match out {
        Some(path) => {
            write_json(path, &prov, &body)?;
            vec![path.to_path_buf()]
        }
        None => {
            let text = serde_json::to_string_pretty(&json!({ "provenance": prov, "report": body }))
                .map_err(|e| CliError::Compute(e.to_string()))?;
            println!("{text}");
            vec![]
        }
    };
    if exit_code != EXIT_OK {
        eprintln!("model validation failed; see the report");
    }
    Ok(Outcome { provenance: prov, outputs, summary: body, exit_code })
}

fn simulate_kinetic(loaded: &Loaded, seed: u64, a: &KineticArgs) -> Result<Outcome, CliError> {
    let r = &loaded.cfg.run;
    let (lambda, t, y, k, n) =
        (a.lambda.unwrap_or(r.lambda), a.t.unwrap_or(r.t), a.y.unwrap_or(r.y), a.k.unwrap_or(r.k), a.samples.unwrap_or(r.samples));
    let params = json!({ "lambda": lambda, "t": t, "y": y, "k": k, "samples": n });
    let (m, _) = model(&loaded.cfg)?;
    let states: Vec<KineticState> = (0..n)
        .into_par_iter()
        .map(|i| sample_y_o(&mut sample_rng(seed, 0, i as u64), &m, lambda, t, y, k))
        .collect::<Result<_, _>>()?;
    let mut report = ExperimentReport::new("simulate-kinetic", &["sample_index", "position", "absorbed", "crossings"]);
    let (mut mean, mut absorbed) = (CompensatedSum::new(), 0usize);
    for (i, s) in states.iter().enumerate() {
        report.push(vec![i as f64, s.position, s.absorbed as u8 as f64, s.crossings as f64]);
        mean.add(s.position);
        absorbed += s.absorbed as usize;
    }
    report.note("absorbed_fraction", absorbed as f64 / n as f64);
    report.note("mean_position", mean.value() / n as f64);
    let summary = notes(&report);
    finish_csv(provenance("simulate-kinetic", loaded, seed, params), &a.out, &report, summary)
}

fn simulate_levy(loaded: &Loaded, seed: u64, a: &LevyArgs) -> Result<Outcome, CliError> {
    let r = &loaded.cfg.run;
    let (lambda, t, y, n) = (a.lambda.unwrap_or(r.lambda), a.t.unwrap_or(r.t), a.y.unwrap_or(r.y), a.samples.unwrap_or(r.samples));
    let tol = a.kill_tolerance.unwrap_or(r.kill_tolerance);
    let (m, d) = model(&loaded.cfg)?;
    let (mode, params) = match a.mode {
        LevyMode::Hatz => ("hatz", json!({ "mode": "hatz", "lambda": lambda, "t": t, "y": y, "samples": n })),
        LevyMode::Zeta => ("zeta", json!({ "mode": "zeta", "kill_tolerance": tol, "t": t, "y": y, "samples": n })),
    };
    let hat = HatZProcess { model: &m, lambda };
    let zeta = ZetaProcess { config: StablePathConfig::from_model(&m, &d).with_kill_tolerance(tol) };
    let sampler: &dyn InterfaceSampler = if mode == "hatz" { &hat } else { &zeta };
    let draws: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| sampler.sample(&mut sample_rng(seed, 0, i as u64), t, y))
        .collect::<Result<_, LevyError>>()?;
    let mut report = ExperimentReport::new("simulate-levy", &["sample_index", "position", "killed"]);
    let mut killed = 0usize;
    for (i, z) in draws.iter().enumerate() {
        report.push(vec![i as f64, z.unwrap_or(0.0), z.is_none() as u8 as f64]);
        killed += z.is_none() as usize;
    }
    report.note("killed_fraction", killed as f64 / n as f64);
    let summary = notes(&report);
    finish_csv(provenance("simulate-levy", loaded, seed, params), &a.out, &report, summary)
}

fn diagnostics(loaded: &Loaded, seed: u64, a: &DiagnosticsArgs) -> Result<Outcome, CliError> {
    let lambda = a.lambda.unwrap_or(loaded.cfg.run.lambda);
    let xis = log_grid(&a.symbol_grid)?;
    let (m, _) = model(&loaded.cfg)?;
    let alpha = m.alpha();
    let theta = a.theta_star.unwrap_or_else(|| theta_star(alpha));
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(CliError::Argument(format!("theta_star must be positive, got {theta}")));
    }
    let params = json!({ "lambda": lambda, "symbol_grid": a.symbol_grid, "theta_star": theta });
    let cut = lambda.powf(1.0 / alpha);
    let psi: Vec<f64> = xis.par_iter().map(|&xi| levy_symbol(&m, lambda, xi)).collect::<Result<_, _>>()?;
    let mut report = ExperimentReport::new("diagnostics", &["xi", "psi", "high_regime", "bound", "ratio"]);
    let (mut high, mut low) = (f64::INFINITY, f64::INFINITY);
    for (&xi, &p) in xis.iter().zip(&psi) {
        let is_high = xi >= cut;
        let bound = if is_high { theta * lambda } else { theta * xi.powf(alpha) };
        let ratio = p / bound;
        if is_high {
            high = high.min(ratio);
        } else {
            low = low.min(ratio);
        }
        report.push(vec![xi, p, is_high as u8 as f64, bound, ratio]);
    }
    report.note("theta_star", theta);
    report.note("high_constant", high);
    report.note("low_constant", low);
    let summary = notes(&report);
    finish_csv(provenance("diagnostics", loaded, seed, params), &a.out, &report, summary)
}

fn betas(text: Option<&str>, default: &[f64]) -> Result<Vec<f64>, CliError> {
    match text {
        Some(t) => lambda_grid(t),
        None => Ok(default.to_vec()),
    }
}

fn limit_probs(m: &ValidatedModel, d: &DerivedConstants, p_plus: Option<f64>) -> Result<(f64, f64), CliError> {
    match p_plus {
        Some(p) if (0.0..=1.0).contains(&p) => Ok((p, 1.0 - p)),
        Some(p) => Err(CliError::Argument(format!("p_plus must lie in [0, 1], got {p}"))),
        None => {
            let c = StablePathConfig::from_model(m, d);
            Ok((c.p_plus, c.p_minus))
        }
    }
}

fn forms(loaded: &Loaded, seed: u64, a: &FormsArgs) -> Result<Outcome, CliError> {
    let grid = space_grid(&a.grid)?;
    let specs: Vec<String> =
        if a.functions.is_empty() { DEFAULT_FUNCTIONS.iter().map(|s| s.to_string()).collect() } else { a.functions.clone() };
    let family: Vec<GridFunction> =
        specs.iter().map(|s| FunctionSpec::parse(s).map(|f| f.on_grid(grid))).collect::<Result<_, _>>()?;
    let mut params = json!({ "op": format!("{:?}", a.op).to_lowercase(), "grid": a.grid, "functions": specs });
    let mut set = |k: &str, v: Value| {
        if let Value::Object(map) = &mut params {
            map.insert(k.to_string(), v);
        }
    };
    let report = match a.op {
        FormOp::Energy => {
            let (m, _) = model(&loaded.cfg)?;
            let bs = betas(a.beta.as_deref(), &[m.alpha()])?;
            set("beta", json!(bs));
            let mut r = ExperimentReport::new("forms-energy", &["function", "beta", "value", "error", "coarse"]);
            for (i, u) in family.iter().enumerate() {
                for &b in &bs {
                    let f = sobolev_energy(u, b)?;
                    r.push(vec![i as f64, b, f.value, f.error, f.coarse]);
                }
            }
            r
        }
        FormOp::Interface => {
            let (m, d) = model(&loaded.cfg)?;
            let (pp, pm) = limit_probs(&m, &d, a.p_plus)?;
            set("p_plus", json!(pp));
            let cols = ["function", "p_plus", "p_minus", "value", "error", "coarse", "sobolev_energy", "ratio"];
            let mut r = ExperimentReport::new("forms-interface", &cols);
            for (i, u) in family.iter().enumerate() {
                let f = interface_energy(u, m.alpha(), pp, pm)?;
                let e = sobolev_energy(u, m.alpha())?.value;
                r.push(vec![i as f64, pp, pm, f.value, f.error, f.coarse, e, f.value / e]);
            }
            r
        }
        FormOp::Lambda => {
            let (m, d) = model(&loaded.cfg)?;
            let lambda = a.lambda.unwrap_or(loaded.cfg.run.lambda);
            set("lambda", json!(lambda));
            let (pp, pm) = limit_probs(&m, &d, None)?;
            let factor = d.r_bar_star / d.c_alpha;
            let cols = ["function", "lambda", "value", "error", "target", "rel_gap"];
            let mut r = ExperimentReport::new("forms-lambda", &cols);
            for (i, u) in family.iter().enumerate() {
                let f = lambda_form(u, &m, lambda)?;
                let target = factor * interface_energy(u, m.alpha(), pp, pm)?.value;
                r.push(vec![i as f64, lambda, f.value, f.error, target, (f.value - target).abs() / target]);
            }
            r.note("limit_factor", factor);
            r
        }
        FormOp::Hardy => {
            let (m, _) = model(&loaded.cfg)?;
            let alpha = m.alpha();
            let bs = betas(a.beta.as_deref(), &[1.2, 1.4, 1.6, 1.8])?;
            set("beta", json!(bs));
            let cols = [
                "function",
                "beta",
                "divergent",
                "ratio",
                "coarse_ratio",
                "numerator",
                "coarse_numerator",
                "embedding_ratio",
                "embedding_bound",
            ];
            let mut r = ExperimentReport::new("forms-hardy", &cols);
            for (i, u) in family.iter().enumerate() {
                for &b in &bs {
                    let (emb, bound) = if b < alpha {
                        (sobolev_norm_sq(u, b)? / sobolev_norm_sq(u, alpha)?, 1.0 + 8.0 / b)
                    } else {
                        (f64::NAN, f64::NAN)
                    };
                    let row = match hardy_ratio(u, b) {
                        Ok(h) => vec![i as f64, b, 0.0, h.ratio, h.coarse_ratio, h.numerator, f64::NAN, emb, bound],
                        Err(FormError::DivergentNumerator { numerator, coarse, .. }) => vec![
                            i as f64,
                            b,
                            1.0,
                            f64::INFINITY,
                            f64::INFINITY,
                            numerator,
                            coarse,
                            emb,
                            bound,
                        ],
                        Err(e) => return Err(e.into()),
                    };
                    r.push(row);
                }
            }
            r
        }
        FormOp::Gamma => {
            let (m, d) = model(&loaded.cfg)?;
            let lambdas = lambda_grid(&a.lambda_grid)?;
            set("lambda_grid", json!(lambdas));
            gamma_harness(&m, &d, &family, &lambdas, seed)?.to_report()
        }
        FormOp::Smseq => {
            let p = a.p_plus.unwrap_or(0.7);
            if !(p > 0.0 && p <= 1.0) {
                return Err(CliError::Argument(format!("p_plus must lie in (0, 1], got {p}")));
            }
            set("p_plus", json!(p));
            set("m_max", json!(a.m_max));
            let mut r = ExperimentReport::new("forms-smseq", &["m", "s_m"]);
            for (i, s) in s_sequence(p, a.m_max).into_iter().enumerate() {
                r.push(vec![(i + 1) as f64, s]);
            }
            r
        }
    };
    let summary = notes(&report);
    finish_csv(provenance("forms", loaded, seed, params), &a.out, &report, summary)
}

fn solve(loaded: &Loaded, seed: u64, a: &SolveArgs) -> Result<Outcome, CliError> {
    let r = &loaded.cfg.run;
    let tg = match &a.t_grid {
        Some(t) => time_grid(t)?,
        None => r.t_grid,
    };
    let xg = match &a.x_grid {
        Some(x) => space_grid(x)?,
        None => r.x_grid,
    };
    let n = a.samples.unwrap_or(r.samples);
    let lambda = a.lambda.unwrap_or(r.lambda);
    let tol = a.kill_tolerance.unwrap_or(r.kill_tolerance);
    let w0 = FunctionSpec::parse(&a.w0)?;
    let (m, d) = model(&loaded.cfg)?;
    let problem = LimitProblem::from_model(&m, &d);
    let init = InitialData { offset: w0.on_grid(xg), t_inf: problem.t_inf };
    let x_grid = GridFunction::symmetric(xg.half_width, xg.spacing, |_| 0.0);
    let mut params = json!({
        "w0": a.w0,
        "t_grid": { "end": tg.end, "steps": tg.steps },
        "x_grid": { "half_width": xg.half_width, "spacing": xg.spacing },
        "samples": n,
    });
    let field = match a.sampler {
        SamplerKind::Zeta => {
            params["sampler"] = json!("zeta");
            params["kill_tolerance"] = json!(tol);
            let s = ZetaProcess { config: StablePathConfig::from_model(&m, &d).with_kill_tolerance(tol) };
            solve_limit_mc(&s, &problem, &init, &tg.times(), &x_grid, n, seed)?
        }
        SamplerKind::Hatz => {
            params["sampler"] = json!("hatz");
            params["lambda"] = json!(lambda);
            let s = HatZProcess { model: &m, lambda };
            solve_limit_mc(&s, &problem, &init, &tg.times(), &x_grid, n, seed)?
        }
    };
    let mut report = field.to_report();
    report.note("theta_bar", problem.theta_bar);
    report.note("t_o", problem.t_o);
    let summary = notes(&report);
    finish_csv(provenance("solve", loaded, seed, params), &a.out, &report, summary)
}

fn compare(loaded: &Loaded, seed: u64, a: &CompareArgs) -> Result<Outcome, CliError> {
    let r = &loaded.cfg.run;
    let lambdas = match &a.lambda_grid {
        Some(g) => lambda_grid(g)?,
        None => r.lambda_grid.clone(),
    };
    let cfg = ComparisonConfig {
        lambdas,
        t: a.t.unwrap_or(r.t),
        y: a.y.unwrap_or(r.y),
        k: a.k.unwrap_or(r.k),
        samples_per_block: a.samples.unwrap_or(r.samples),
        blocks: a.blocks.unwrap_or(r.blocks),
        reference_lambda: a.reference_lambda.unwrap_or(r.reference_lambda),
        reference_samples: a.reference_samples.unwrap_or(r.reference_samples),
        seed,
    };
    let params = serde_json::to_value(&cfg).map_err(|e| CliError::Compute(e.to_string()))?;
    let (m, d) = model(&loaded.cfg)?;
    let result = kinetic_vs_limit(&m, &d, &cfg)?;
    let report = result.to_report();
    let mut summary = notes(&report);
    summary["ks_medians_decrease"] = json!(result.ks_medians_decrease());
    finish_csv(provenance("compare", loaded, seed, params), &a.out, &report, summary)
}
