use kinetic_interface::kinetic_mc::{
    apply_interface, build_path, clock_lln_gap, estimate_w, first_crossing_vs_bound, sample_chain, sample_y_o,
    y_o_from_chain, KineticError,
};
use kinetic_interface::model::{InterfaceLaw, Model, ModelParams, Profile};
use kinetic_interface::rng::{sample_rng, SampleRng};
use kinetic_interface::stats::{ks_p_value, median, EmpiricalMeasure};
use proptest::prelude::*;
use std::sync::LazyLock;
use rand::{RngCore, SeedableRng};

static DEFAULT: LazyLock<Model> = LazyLock::new(|| Model::new(ModelParams::default_model()));

fn default_model() -> &'static Model {
    &DEFAULT
}

/// Constant laws `(p₊, 1 − p₊, 0)` for `p₊ ∈ {0, 0.3, 0.7, 1}`, built once.
static NON_ABSORBING: LazyLock<Vec<Model>> =
    LazyLock::new(|| [0.0, 0.3, 0.7, 1.0].iter().map(|&p| constant_law(p, 1.0 - p, 0.0)).collect());

fn constant_law(p_plus: f64, p_minus: f64, p_zero: f64) -> Model {
    Model::new(ModelParams::default_model().with_interface(InterfaceLaw::Constant { p_plus, p_minus, p_zero }))
}

#[test]
fn uniform_r2_gives_uniform_frequencies() {
    let mut p = ModelParams::default_model();
    p.r2 = Profile::Uniform;
    let m = Model::new(p);
    let mut rng = sample_rng(3, 0, 0);
    let chain = sample_chain(&mut rng, &m, 0.1, 100_001);
    let ks = EmpiricalMeasure::new(chain.states[1..].to_vec()).unwrap().ks_distance_to(|k| (k + 0.5).clamp(0.0, 1.0));
    assert!(ks_p_value(ks, 100_000.0) > 1e-3, "KS {ks}");
}

#[test]
fn default_frequencies_have_cosine_mean_minus_one_half() {
    // ∫cos(2πk)·2sin²(πk)dk = −1/2.
    let m = default_model();
    let mut rng = sample_rng(4, 0, 0);
    let chain = sample_chain(&mut rng, &m, 0.1, 200_001);
    let c: Vec<f64> = chain.states[1..].iter().map(|k| (2.0 * std::f64::consts::PI * k).cos()).collect();
    let (mean, se) = kinetic_interface::numerics::sum::mean_and_stderr(&c);
    assert!((mean + 0.5).abs() < 4.0 * se, "{mean} ± {se}");
}

#[test]
fn chain_starts_at_k0_and_renewals_increase() {
    let m = default_model();
    let chain = sample_chain(&mut sample_rng(5, 0, 0), &m, 0.23, 1000);
    assert_eq!(chain.states[0], 0.23);
    assert!(chain.taus.iter().all(|t| *t > 0.0));
    let r = chain.renewal_times(&m);
    assert_eq!(r[0], 0.0);
    assert!(r.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn first_step_moves_by_the_scaled_free_path() {
    let m = default_model();
    let chain = sample_chain(&mut sample_rng(6, 0, 0), &m, 0.3, 5);
    for lambda in [1.0, 1e3] {
        let path = build_path(&mut sample_rng(6, 1, 0), &m, &chain, 0.8, lambda).unwrap();
        let want = 0.8 - lambda.powf(-1.0 / m.alpha()) * m.s(0.3) * chain.taus[0];
        assert!((path.positions[1] - want).abs() < 1e-15);
    }
}

#[test]
fn zero_start_is_rejected() {
    let m = default_model();
    let chain = sample_chain(&mut sample_rng(1, 0, 0), &m, 0.3, 5);
    assert_eq!(build_path(&mut sample_rng(1, 0, 0), &m, &chain, 0.0, 1.0), Err(KineticError::ZeroStart));
    assert_eq!(sample_y_o(&mut sample_rng(1, 0, 0), &m, 10.0, 1.0, 0.0, 0.1).unwrap_err(), KineticError::ZeroStart);
}

#[test]
fn full_absorption_kills_at_the_first_crossing() {
    let m = constant_law(0.0, 0.0, 1.0);
    for i in 0..200 {
        let chain = sample_chain(&mut sample_rng(7, 0, i), &m, 0.2, 400);
        let path = build_path(&mut sample_rng(7, 1, i), &m, &chain, 0.5, 10.0).unwrap();
        let path = apply_interface(&mut sample_rng(7, 2, i), &m, &chain, path);
        let z = path.interface_positions();
        match path.crossing_log.first() {
            Some(c) => {
                assert_eq!(path.absorbed_at, Some(c.time));
                assert_eq!(path.signs, vec![0]);
                assert!(z[c.index..].iter().all(|v| *v == 0.0));
                assert!(z[..c.index].iter().all(|v| *v != 0.0));
            }
            None => assert!(path.absorbed_at.is_none()),
        }
    }
}

#[test]
fn certain_absorption_accumulates_in_time() {
    // Survival decays only like t^{1/α − 1}, so the check is monotonicity, not emptiness.
    let m = constant_law(0.0, 0.0, 1.0);
    let absorbed = |t: f64| {
        (0..500).filter(|&i| sample_y_o(&mut sample_rng(8, 0, i), &m, 100.0, t, 0.5, 0.2).unwrap().absorbed).count()
    };
    let (a, b, c) = (absorbed(0.2), absorbed(2.0), absorbed(20.0));
    assert!(a < b && b < c && c > 400, "{a} {b} {c}");
}

#[test]
fn killed_representation_returns_the_thermostat_value() {
    let mut p = ModelParams::default_model().with_interface(InterfaceLaw::Constant { p_plus: 0.0, p_minus: 0.0, p_zero: 1.0 });
    p.t_o = 0.25;
    let m = Model::new(p);
    let points = [(0.5, 0.2), (-1.0, -0.1)];
    let w = estimate_w(&m, 100.0, |_, _| 7.0, 2.0, &points, 500, 9).unwrap();
    for (j, &(y, k)) in points.iter().enumerate() {
        let killed = (0..500u64)
            .filter(|&i| sample_y_o(&mut sample_rng(9, j as u64, i), &m, 100.0, 2.0, y, k).unwrap().absorbed)
            .count() as f64;
        let want = (0.25 * killed + 7.0 * (500.0 - killed)) / 500.0;
        assert!(killed > 0.0);
        assert!((w[j].0 - want).abs() < 1e-12, "{} vs {want}", w[j].0);
    }
}

#[test]
fn constants_are_preserved_and_time_zero_is_exact() {
    let mut p = ModelParams::default_model();
    p.t_o = 2.5;
    let m = Model::new(p);
    let w = estimate_w(&m, 1e3, |_, _| 2.5, 1.0, &[(0.5, 0.2), (-2.0, 0.4)], 500, 1).unwrap();
    assert!(w.iter().all(|&(mean, se)| mean == 2.5 && se == 0.0));
    let w0 = |y: f64, k: f64| (-y * y).exp() * (1.0 + k);
    let w = estimate_w(&m, 1e3, w0, 0.0, &[(0.5, 0.2), (-2.0, 0.4)], 50, 1).unwrap();
    assert_eq!(w[0], (w0(0.5, 0.2), 0.0));
    assert_eq!(w[1], (w0(-2.0, 0.4), 0.0));
}

#[test]
fn symmetric_data_give_a_symmetric_solution() {
    // W₀(y, k) = W₀(−y, −k) and an even model give W(t, y, k) = W(t, −y, −k).
    let m = default_model();
    let w0 = |y: f64, k: f64| (-(y - 0.5).powi(2)).exp() * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * k).sin()) + (-(y + 0.5).powi(2)).exp() * (1.0 - 0.5 * (2.0 * std::f64::consts::PI * k).sin());
    let w = estimate_w(&m, 1e3, w0, 0.5, &[(0.7, 0.15), (-0.7, -0.15)], 20_000, 11).unwrap();
    let (d, se) = (w[0].0 - w[1].0, (w[0].1.powi(2) + w[1].1.powi(2)).sqrt());
    assert!(d.abs() < 3.0 * se, "{d} vs {se}");
}

#[test]
fn sampler_matches_the_path_oracle() {
    let m = default_model();
    for i in 0..200u64 {
        let (lambda, t, y, k) = (1e3, 0.7, if i % 2 == 0 { 0.6 } else { -1.1 }, 0.37 - 0.003 * i as f64);
        let fast = sample_y_o(&mut sample_rng(12, 0, i), &m, lambda, t, y, k).unwrap();
        let mut rng = sample_rng(12, 0, i);
        let mut sigma = SampleRng::seed_from_u64(rng.next_u64());
        let chain = sample_chain(&mut rng, &m, k, 50_000);
        let slow = y_o_from_chain(&m, &chain, &mut sigma, lambda, t, y).unwrap();
        assert_eq!(fast.absorbed, slow.absorbed);
        assert_eq!(fast.crossings, slow.crossings);
        assert!((fast.position - slow.position).abs() <= 1e-12 * (1.0 + slow.position.abs()), "{i}");
    }
}

#[test]
fn clock_gap_vanishes_at_zero_horizon_and_shrinks_with_lambda() {
    let m = default_model();
    let theta = 1.0;
    assert_eq!(clock_lln_gap(&mut sample_rng(1, 0, 0), &m, theta, 1e3, 0.0, 0.2), 0.0);
    let med = |lambda: f64| {
        let g: Vec<f64> =
            (0..60).map(|i| clock_lln_gap(&mut sample_rng(13, lambda as u64, i), &m, theta, lambda, 1.0, 0.2)).collect();
        median(&g)
    };
    let (a, b, c) = (med(1e2), med(1e3), med(1e4));
    assert!(a > b && b > c, "{a} {b} {c}");
}

#[test]
fn first_crossing_probability_is_the_exponential_tail() {
    let m = default_model();
    let k = m.s_inverse(2.0).unwrap();
    let lambda = 6.3496f64.powf(1.5);
    let (p, bound) = first_crossing_vs_bound(&m, lambda, 1.0, k, 200_000, 14);
    let exact = (-6.3496f64 / 2.0).exp();
    assert!((bound - exact).abs() < 1e-12);
    let sigma = (exact * (1.0 - exact) / 200_000.0).sqrt();
    assert!((p - exact).abs() < 3.0 * sigma, "{p} vs {exact}");
    // Drift away from the interface never crosses on the first step.
    assert_eq!(first_crossing_vs_bound(&m, lambda, 1.0, -k, 10_000, 14).0, 0.0);
    // The bound decreases in λ.
    let bounds: Vec<f64> = [1e1, 1e2, 1e3].iter().map(|&l| first_crossing_vs_bound(&m, l, 1.0, k, 1, 0).1).collect();
    assert!(bounds.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn kinetic_marginals_approach_each_other_along_lambda() {
    // KS between law(Y°_λ) and law(Y°_{4λ}), median over blocks, decreases in λ.
    let m = default_model();
    let (blocks, n) = (8u64, 1500usize);
    let sample = |lambda: f64, b: u64| -> EmpiricalMeasure {
        let xs = (0..n as u64)
            .map(|i| sample_y_o(&mut sample_rng(15, (lambda as u64) * 64 + b, i), &m, lambda, 1.0, 1.0, 0.2).unwrap().position)
            .collect();
        EmpiricalMeasure::new(xs).unwrap()
    };
    let med = |lambda: f64| {
        let ks: Vec<f64> = (0..blocks).map(|b| sample(lambda, b).ks_distance(&sample(4.0 * lambda, b))).collect();
        median(&ks)
    };
    let (a, b) = (med(1e2), med(1e3));
    assert!(a > b, "{a} {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn crossings_are_the_sign_changes_of_the_skeleton(seed in any::<u64>(), y in 0.05f64..2.0, neg in any::<bool>()) {
        let m = default_model();
        let y = if neg { -y } else { y };
        let chain = sample_chain(&mut sample_rng(seed, 0, 0), &m, 0.2, 300);
        let path = build_path(&mut sample_rng(seed, 1, 0), &m, &chain, y, 50.0).unwrap();
        let brute: Vec<usize> = (1..path.positions.len())
            .filter(|&n| path.positions[n] * path.positions[n - 1] <= 0.0)
            .collect();
        let got: Vec<usize> = path.crossing_log.iter().map(|c| c.index).collect();
        prop_assert_eq!(got, brute);
        prop_assert!(path.crossing_log.windows(2).all(|w| w[1].index > w[0].index));
    }

    #[test]
    fn without_absorption_the_modulus_is_preserved(seed in any::<u64>(), law in 0usize..4) {
        let m = &NON_ABSORBING[law];
        let chain = sample_chain(&mut sample_rng(seed, 0, 0), &m, -0.3, 300);
        let path = build_path(&mut sample_rng(seed, 1, 0), &m, &chain, 0.4, 50.0).unwrap();
        let path = apply_interface(&mut sample_rng(seed, 2, 0), &m, &chain, path);
        prop_assert!(path.absorbed_at.is_none());
        for (a, b) in path.interface_positions().iter().zip(&path.positions) {
            prop_assert_eq!(a.abs(), b.abs());
        }
    }

    #[test]
    fn transmission_only_is_the_free_path(seed in any::<u64>()) {
        let m = &NON_ABSORBING[3];
        let chain = sample_chain(&mut sample_rng(seed, 0, 0), &m, 0.1, 200);
        let path = build_path(&mut sample_rng(seed, 1, 0), &m, &chain, 0.3, 20.0).unwrap();
        let path = apply_interface(&mut sample_rng(seed, 2, 0), &m, &chain, path);
        prop_assert_eq!(path.interface_positions(), path.positions.clone());
    }

    #[test]
    fn reflection_only_flips_at_every_crossing(seed in any::<u64>()) {
        let m = &NON_ABSORBING[0];
        let chain = sample_chain(&mut sample_rng(seed, 0, 0), &m, 0.1, 200);
        let path = build_path(&mut sample_rng(seed, 1, 0), &m, &chain, 0.3, 20.0).unwrap();
        let path = apply_interface(&mut sample_rng(seed, 2, 0), &m, &chain, path);
        prop_assert!(path.signs.iter().all(|s| *s == -1));
        // Reflected paths never leave the starting side.
        prop_assert!(path.interface_positions().iter().all(|z| *z >= 0.0));
    }

    #[test]
    fn absorbed_paths_stay_frozen(seed in any::<u64>()) {
        let m = default_model();
        let chain = sample_chain(&mut sample_rng(seed, 0, 0), &m, 0.05, 400);
        let path = build_path(&mut sample_rng(seed, 1, 0), &m, &chain, 0.2, 30.0).unwrap();
        let path = apply_interface(&mut sample_rng(seed, 2, 0), &m, &chain, path);
        if let Some(pos) = path.signs.iter().position(|s| *s == 0) {
            let from = path.crossing_log[pos].index;
            prop_assert!(path.interface_positions()[from..].iter().all(|z| *z == 0.0));
        }
    }
}
