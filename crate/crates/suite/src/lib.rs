//! Acceptance criteria of the kinetic interface toolkit.
//!
//! Each criterion runs at its stated sample sizes and tolerances and returns a verdict with the
//! measured quantities. The `acceptance` test target prints one line per criterion.

use std::path::Path;
use std::sync::LazyLock;
use std::time::Duration;

use clap::Parser;
use kinetic_interface::forms::{
    gamma_harness, hardy_ratio, s_sequence, s_sequence_enumerated, s_sequence_exact, sobolev_norm_sq, FormError,
    SequencePattern,
};
use kinetic_interface::grid::{bump, GridFunction};
use kinetic_interface::kinetic_mc::{clock_lln_gap, first_crossing_vs_bound};
use kinetic_interface::levy_limit::{
    symbol_bounds, symmetry_defect, theta_star_with, ExtrapolatedLaw, HatZProcess, StablePathConfig, ZetaProcess,
};
use kinetic_interface::model::{derived_constants, validate_params, DerivedConstants, Model, ModelParams};
use kinetic_interface::rng::sample_rng;
use kinetic_interface::solver::{
    coefficient_sweep, kinetic_vs_limit, limit_sample, solve_limit_mc, ComparisonConfig, InitialData, LimitProblem,
    TestFunction, TimeProfile,
};
use kinetic_interface::stats::{median, EmpiricalMeasure};
use kinetic_interface_cli::commands::{run, Cli};

static DEFAULT: LazyLock<(Model, DerivedConstants)> = LazyLock::new(|| {
    let vm = validate_params(ModelParams::default_model()).expect("default model is valid");
    let d = derived_constants(&vm).expect("default constants");
    (Model::new(ModelParams::default_model()), d)
});

fn model() -> &'static Model {
    &DEFAULT.0
}

fn constants() -> &'static DerivedConstants {
    &DEFAULT.1
}

/// Outcome of one criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// A numbered criterion with its runtime budget.
pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub budget: Duration,
    pub run: fn() -> Verdict,
}

const fn criterion(id: usize, name: &'static str, secs: u64, run: fn() -> Verdict) -> Criterion {
    Criterion { id, name, budget: Duration::from_secs(secs), run }
}

pub const CRITERIA: [Criterion; 12] = [
    criterion(1, "exponential crossing bound", 10, crossing_bound),
    criterion(2, "clock law of large numbers", 120, clock_lln),
    criterion(3, "tail constants", 5, tail_constants),
    criterion(4, "Levy symbol bounds", 30, symbol_regimes),
    criterion(5, "semigroup symmetry", 300, semigroup_symmetry),
    criterion(6, "limit identification", 600, limit_identification),
    criterion(7, "kinetic to limit convergence", 1200, kinetic_to_limit),
    criterion(8, "Gamma-convergence recovery", 120, gamma_recovery),
    criterion(9, "s_m lemma", 1, s_m_lemma),
    criterion(10, "Hardy suite", 60, hardy_suite),
    criterion(11, "weak-formulation residual", 1800, weak_residual_sweep),
    criterion(12, "determinism across worker counts", 600, determinism),
];

/// `P(yZ₁^λ < 0)` at `y = 1`, `S(k) = 2`, `λ^{1/α} = 6.3496` against `exp(−3.1748)`.
fn crossing_bound() -> Verdict {
    let m = model();
    let k = m.s_inverse(2.0).expect("S(k) = 2 is attained");
    let lambda = 6.3496f64.powf(1.5);
    let n = 1_000_000;
    let (p, bound) = first_crossing_vs_bound(m, lambda, 1.0, k, n, 11);
    let exact = (-3.1748f64).exp();
    let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
    let z = (p - exact) / sigma;
    let pass = z.abs() < 3.0 && (bound - exact).abs() < 1e-12;
    Verdict::new(pass, format!("estimate {p:.5}, exact {exact:.5}, bound {bound:.5}, z = {z:+.2}"))
}

/// Median sup-deviation of the rescaled clock over 200 replications.
fn clock_lln() -> Verdict {
    let (m, d) = (model(), constants());
    let lambdas = [1e2, 1e4, 1e6];
    let medians: Vec<f64> = lambdas
        .iter()
        .enumerate()
        .map(|(l, &lambda)| {
            let gaps: Vec<f64> = (0..200)
                .map(|i| {
                    let mut rng = sample_rng(12, l as u64, i);
                    clock_lln_gap(&mut rng, m, d.theta_bar, lambda, 1.0, 0.2)
                })
                .collect();
            median(&gaps)
        })
        .collect();
    let pass = medians.windows(2).all(|w| w[1] < w[0]) && medians[2] < 1e-2;
    Verdict::new(pass, format!("medians {:.3e} / {:.3e} / {:.3e} at λ = 1e2 / 1e4 / 1e6", medians[0], medians[1], medians[2]))
}

/// `r(y)|y|^{1+α}` and `r̄(y)|y|^{1+α}` at `|y| = 10³` against `r_*` and `r̄_*`.
fn tail_constants() -> Verdict {
    let (m, d) = (model(), constants());
    let y: f64 = 1e3;
    let scale = y.powf(1.0 + d.alpha);
    let mut worst: f64 = 0.0;
    for y in [y, -y] {
        let r = m.s_density(y).expect("r(y)") * scale;
        let rb = m.bar_r(y).expect("r̄(y)") * scale;
        worst = worst.max((r / d.r_star - 1.0).abs()).max((rb / d.r_bar_star - 1.0).abs());
    }
    Verdict::new(worst < 0.01, format!("worst relative error {worst:.2e} (r_* = {:.6}, r̄_* = {:.6})", d.r_star, d.r_bar_star))
}

/// Both regime bounds of `Ψ_λ` at `λ = 10⁴` and the stability of `θ_*`.
fn symbol_regimes() -> Verdict {
    let m = model();
    let alpha = m.alpha();
    let theta = theta_star_with(alpha, 1000);
    let refined = theta_star_with(alpha, 2000);
    let xis: Vec<f64> = (0..81).map(|i| 10f64.powf(-3.0 + 8.0 * i as f64 / 80.0)).collect();
    let b = symbol_bounds(m, 1e4, &xis, theta).expect("symbol quadrature");
    let pass = theta > 0.0 && (theta - refined).abs() < 1e-6 && b.high_constant >= 0.5 && b.low_constant >= 0.5;
    Verdict::new(
        pass,
        format!(
            "θ_* = {theta:.9} (refined {refined:.9}), high constant {:.3}, low constant {:.3}",
            b.high_constant, b.low_constant
        ),
    )
}

/// `|⟨P_t u, v⟩ − ⟨u, P_t v⟩|` for two disjoint bumps on opposite sides of the interface.
fn semigroup_symmetry() -> Verdict {
    let h = 1.0 / 64.0;
    let u = GridFunction::symmetric(4.0, h, |y| bump(y, 1.0, 0.6, 1.0));
    let v = GridFunction::symmetric(4.0, h, |y| bump(y, -1.5, 0.8, 0.7));
    let proxy = HatZProcess { model: model(), lambda: 1e4 };
    let s = symmetry_defect(&proxy, &u, &v, 0.5, 1_000_000, 5).expect("symmetry defect");
    let z = s.defect / s.stderr;
    Verdict::new(
        z < 3.0,
        format!("⟨P_t u, v⟩ = {:.5e}, ⟨u, P_t v⟩ = {:.5e}, defect {:.2}σ", s.forward, s.backward, z),
    )
}

/// KS distances between `Ẑ°_λ(1, 1)` marginals and the extrapolated `ζ°` law.
fn limit_identification() -> Verdict {
    let (m, d) = (model(), constants());
    let n = 100_000;
    let hat = |lambda: f64, stream: u64| {
        let proxy = HatZProcess { model: m, lambda };
        EmpiricalMeasure::new(limit_sample(&proxy, 1.0, 1.0, 1.0, n, 6, stream).expect("Ẑ° sample")).expect("sample")
    };
    let low = hat(1e4, 0);
    let high = hat(1e6, 1);
    let zeta = |h: f64, stream: u64| {
        let z = ZetaProcess { config: StablePathConfig::from_model(m, d).with_kill_tolerance(h) };
        EmpiricalMeasure::new(limit_sample(&z, 1.0, 1.0, 1.0, n, 6, stream).expect("ζ° sample")).expect("sample")
    };
    let law = ExtrapolatedLaw::new(zeta(1e-3, 2), zeta(5e-4, 3), d.alpha);
    let ks_hat = low.ks_distance(&high);
    let ks_zeta = law.ks_distance(&high);
    let killed = |e: &EmpiricalMeasure| e.cdf(0.0) - e.cdf_left(0.0);
    Verdict::new(
        ks_hat <= 0.02 && ks_zeta <= 0.03,
        format!(
            "KS(1e4, 1e6) = {ks_hat:.4} (limit 0.02), KS(ζ°, 1e6) = {ks_zeta:.4} (limit 0.03); killed {:.3} / {:.3}",
            killed(&low),
            killed(&high)
        ),
    )
}

/// Median KS distance between `Y°_λ(1, 1, 0.2)` and the `λ = 10⁶` proxy of `η°(1, 1)`.
fn kinetic_to_limit() -> Verdict {
    let cfg = ComparisonConfig {
        lambdas: vec![1e2, 1e3, 1e4],
        t: 1.0,
        y: 1.0,
        k: 0.2,
        samples_per_block: 10_000,
        blocks: 20,
        reference_lambda: 1e6,
        reference_samples: 20_000,
        seed: 7,
    };
    let r = kinetic_vs_limit(model(), constants(), &cfg).expect("comparison");
    let medians: Vec<String> = r.medians().iter().map(|(l, ks, _)| format!("{ks:.4} at λ = {l:.0e}")).collect();
    Verdict::new(r.ks_medians_decrease(), format!("median KS {}", medians.join(", ")))
}

/// Relative gaps `|Ê_λ[u] − ℰ°[u]|/ℰ°[u]` for three wide bumps at `h = 2⁻¹⁰`.
fn gamma_recovery() -> Verdict {
    let (m, d) = (model(), constants());
    let h = 2f64.powi(-10);
    let family: Vec<GridFunction> = [(2.5, 2.0), (-3.0, 2.5), (4.0, 3.0)]
        .iter()
        .map(|&(c, w)| GridFunction::symmetric(8.0, h, |y| bump(y, c, w, 1.0)))
        .collect();
    let r = gamma_harness(m, d, &family, &[1e2, 1e3, 1e4, 1e5], 8).expect("gamma harness");
    let mut pass = true;
    let mut parts = Vec::new();
    for f in 0..family.len() {
        let gaps: Vec<f64> = r.recovery.iter().filter(|g| g.function == f).map(|g| g.rel_gap).collect();
        let last = *gaps.last().expect("λ grid");
        pass &= r.gaps_decrease(f) && last < 0.05;
        parts.push(gaps.iter().map(|g| format!("{:.2}%", 100.0 * g)).collect::<Vec<_>>().join(" > "));
    }
    Verdict::new(pass, format!("gaps {}", parts.join("; ")))
}

/// Exact recurrence against enumeration, the three monotonicity cases and the rate at `m = 50`.
fn s_m_lemma() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for num in 1..=9u64 {
        let exact = s_sequence_exact(num, 10, 20).expect("10^20 fits");
        pass &= (1..=20u32).all(|m| s_sequence_enumerated(num, 10, m) == Some(exact[m as usize - 1]));
        let expected = match num {
            5 => SequencePattern::Constant,
            n if n > 5 => SequencePattern::StrictlyDecreasing,
            _ => SequencePattern::OddIncreasingEvenDecreasing,
        };
        pass &= SequencePattern::of_exact(&exact, 10) == expected;
        let p = num as f64 / 10.0;
        let dev = (s_sequence(p, 50)[49] - 0.5).abs();
        if num == 5 {
            // Both sides vanish at p₊ = 1/2, where the lemma gives s_m = 1/2 for every m.
            pass &= dev == 0.0;
        } else {
            pass &= dev < (2.0 * p - 1.0).abs().powi(50);
        }
    }
    notes.push("recurrence = enumeration for m ≤ 20, p₊ ∈ {0.1, …, 0.9}".to_string());
    notes.push("patterns match".to_string());
    notes.push("|s_50 − 1/2| < |2p₊ − 1|^50 for p₊ ≠ 1/2, s_50 = 1/2 at p₊ = 1/2".to_string());
    Verdict::new(pass, notes.join("; "))
}

/// Hardy ratios across `β ∈ [1.2, 1.8]`, the divergent case and the embedding constant.
fn hardy_suite() -> Verdict {
    let h = 1.0 / 256.0;
    let tent = |c: f64, w: f64| move |y: f64| (1.0 - (y - c).abs() / w).max(0.0);
    let bank: Vec<GridFunction> = vec![
        GridFunction::symmetric(8.0, h, |y| bump(y, 1.5, 1.0, 1.0) - bump(y, -2.0, 1.5, 0.6)),
        GridFunction::symmetric(8.0, h, |y| tent(-1.5, 1.0)(y) + tent(1.5, 1.0)(y)),
        GridFunction::symmetric(8.0, h, |y| y * bump(y, 0.0, 2.0, 1.0)),
    ];
    let mut pass = true;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_refinement: f64 = 0.0;
    for u in &bank {
        for beta in [1.2, 1.4, 1.6, 1.8] {
            match hardy_ratio(u, beta) {
                Ok(r) => {
                    let drift = (r.ratio / r.coarse_ratio - 1.0).abs();
                    pass &= r.ratio.is_finite() && r.ratio > 0.0 && drift < 0.01;
                    worst_ratio = worst_ratio.max(r.ratio);
                    worst_refinement = worst_refinement.max(drift);
                }
                Err(_) => pass = false,
            }
        }
        let top = sobolev_norm_sq(u, 1.5).expect("H^{α/2} norm");
        for beta in [0.5, 1.0, 1.2, 1.4] {
            pass &= sobolev_norm_sq(u, beta).expect("H^{β/2} norm") <= (1.0 + 8.0 / beta) * top;
        }
    }
    let flagged = [1.2, 1.8].iter().all(|&beta| {
        let u = GridFunction::symmetric(8.0, h / 2.0, tent(0.0, 1.0));
        matches!(hardy_ratio(&u, beta), Err(FormError::DivergentNumerator { numerator, coarse, .. }) if numerator > coarse)
    });
    pass &= flagged;
    Verdict::new(
        pass,
        format!(
            "largest ratio {worst_ratio:.3}, largest refinement drift {:.3}%, u(0) ≠ 0 flagged: {flagged}",
            100.0 * worst_refinement
        ),
    )
}

/// Coefficient sweep of the weak identity for the `ζ°` solution.
fn weak_residual_sweep() -> Verdict {
    let (m, d) = (model(), constants());
    let problem = LimitProblem::from_model(m, d);
    let zeta = ZetaProcess { config: StablePathConfig::from_model(m, d) };
    let (hw, h) = (6.0, 0.125);
    let on_grid = |c: f64, w: f64| GridFunction::symmetric(hw, h, move |y| bump(y, c, w, 1.0));
    let w0 = InitialData { offset: on_grid(1.5, 1.0), t_inf: problem.t_inf };
    let times: Vec<f64> = (0..=20).map(|i| 0.025 * i as f64).collect();
    let field = solve_limit_mc(&zeta, &problem, &w0, &times, &on_grid(0.0, 1.0), 4000, 9).expect("solution");
    let bank = [
        TestFunction { space: on_grid(1.5, 1.0), time: TimeProfile::Constant },
        TestFunction { space: on_grid(-1.5, 1.0), time: TimeProfile::Exponential { rate: 1.0 } },
        TestFunction { space: on_grid(2.5, 1.5), time: TimeProfile::Cosine { frequency: 2.0 } },
    ];
    let candidates: Vec<f64> = (1..=600).map(|i| 0.01 * i as f64).collect();
    let s = coefficient_sweep(&field, &bank, &candidates).expect("sweep");
    Verdict::new(
        s.best_residual < 0.05,
        format!(
            "minimizer {:.2} with residual {:.2}%; candidates γ̄ = {:.4}, θ̄·r̄_* = {:.4} (in the q_α normalization of Ê: {:.4}, {:.4}); per-function roots {:?}",
            s.best,
            100.0 * s.best_residual,
            d.gamma_bar,
            d.gamma_bar_theta,
            d.gamma_bar / d.c_alpha,
            d.gamma_bar_theta / d.c_alpha,
            s.roots.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        ),
    )
}

/// Every subcommand run in a pool of one worker and of three; output files compared byte for byte.
fn determinism() -> Verdict {
    let dir = tempfile::tempdir().expect("temporary directory");
    let runs: [(&str, &[&str]); 12] = [
        ("v.json", &["validate"]),
        ("k.csv", &["simulate-kinetic", "--lambda", "1e3", "--samples", "2000"]),
        ("h.csv", &["simulate-levy", "--mode", "hatz", "--lambda", "1e3", "--samples", "2000"]),
        ("z.csv", &["simulate-levy", "--mode", "zeta", "--samples", "2000"]),
        ("d.csv", &["diagnostics", "--lambda", "1e3", "--symbol-grid", "1e-2:1e3:11"]),
        ("e.csv", &["forms", "--op", "energy", "--grid", "8:0.0625"]),
        ("g.csv", &["forms", "--op", "gamma", "--grid", "8:0.0625", "--lambda-grid", "1e2,1e3"]),
        ("y.csv", &["forms", "--op", "hardy", "--grid", "8:0.0625"]),
        ("s.csv", &["forms", "--op", "smseq", "--p-plus", "0.7"]),
        ("w.csv", &["solve", "--samples", "200", "--t-grid", "0.5:4", "--x-grid", "3:0.5"]),
        ("w2.csv", &["solve", "--sampler", "hatz", "--lambda", "1e3", "--samples", "100", "--t-grid", "0.5:2", "--x-grid", "3:0.5"]),
        (
            "c.csv",
            &["compare", "--lambda-grid", "1e2,1e3", "--samples", "500", "--blocks", "2", "--reference-lambda", "1e4", "--reference-samples", "1000"],
        ),
    ];
    let mut mismatched = Vec::new();
    for (name, args) in runs {
        let outputs: Vec<Option<Vec<u8>>> =
            [1usize, 3].iter().map(|&w| run_in_pool(dir.path(), w, args, &format!("{w}_{name}"))).collect();
        match (&outputs[0], &outputs[1]) {
            (Some(a), Some(b)) if a == b => {}
            _ => mismatched.push(args[0..args.len().min(3)].join(" ")),
        }
    }
    let detail = if mismatched.is_empty() {
        format!("{} runs byte-identical with 1 and 3 workers", runs.len())
    } else {
        format!("differing or failed: {}", mismatched.join("; "))
    };
    Verdict::new(mismatched.is_empty(), detail)
}

/// Runs one `iflab` command line inside a pool of `workers` threads and returns the output file.
fn run_in_pool(dir: &Path, workers: usize, args: &[&str], out: &str) -> Option<Vec<u8>> {
    let path = dir.join(out);
    let argv = ["iflab"].iter().chain(args).map(|s| s.to_string()).chain([
        "--seed".to_string(),
        "3".to_string(),
        "--out".to_string(),
        path.display().to_string(),
    ]);
    let cli = Cli::try_parse_from(argv).ok()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().ok()?;
    match pool.install(|| run(cli)) {
        Ok(0) => std::fs::read(&path).ok(),
        Ok(code) => {
            eprintln!("{args:?}: exit code {code}");
            None
        }
        Err(e) => {
            eprintln!("{args:?}: {e}");
            None
        }
    }
}
