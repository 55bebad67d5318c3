use std::sync::LazyLock;

use kinetic_interface::grid::{bump, GridFunction};
use kinetic_interface::levy_limit::{
    d_modulus, levy_symbol, levy_symbol_kspace, sample_hat_z_o, sample_hat_z_pair_times, sample_hat_z_paths,
    sample_stable_increment, sample_zeta_o, sample_zeta_o_times, semigroup_apply, survival_curve, symmetry_defect,
    theta_star, theta_star_with, HatZProcess, JumpKernelTable, LevyError, StablePathConfig, ZetaProcess,
};
use kinetic_interface::model::{derived_constants, validate_params, InterfaceLaw, Model, ModelParams};
use kinetic_interface::rng::sample_rng;
use kinetic_interface::stats::{ks_two_sample_p, EmpiricalMeasure};
use proptest::prelude::*;

static DEFAULT: LazyLock<Model> = LazyLock::new(|| Model::new(ModelParams::default_model()));
static TRANSMITTING: LazyLock<Model> = LazyLock::new(|| constant_law(1.0, 0.0, 0.0));
static NON_ABSORBING: LazyLock<Model> = LazyLock::new(|| constant_law(0.4, 0.6, 0.0));

fn constant_law(p_plus: f64, p_minus: f64, p_zero: f64) -> Model {
    Model::new(ModelParams::default_model().with_interface(InterfaceLaw::Constant { p_plus, p_minus, p_zero }))
}

fn zeta_config() -> StablePathConfig {
    let vm = validate_params(ModelParams::default_model()).unwrap();
    let d = derived_constants(&vm).unwrap();
    StablePathConfig::from_model(vm.model(), &d)
}

fn stable_draws(seed: u64, n: usize, c: f64, dt: f64) -> Vec<f64> {
    let mut rng = sample_rng(seed, 0, 0);
    (0..n).map(|_| sample_stable_increment(&mut rng, 1.5, c, dt)).collect()
}

#[test]
fn stable_tails_match_the_levy_density() {
    // P(|X| > u) ~ (2c/α)u^{−α} for the Lévy density c|z|^{−1−α} at dt = 1.
    let n = 2_000_000;
    let xs = stable_draws(1, n, 1.0, 1.0);
    for u in [30.0, 100.0] {
        let p = xs.iter().filter(|x| x.abs() > u).count() as f64 / n as f64;
        let want = 2.0 / 1.5 * f64::powf(u, -1.5);
        assert!((p / want - 1.0).abs() < 0.08, "u = {u}: {p} vs {want}");
    }
}

#[test]
fn stable_increments_are_symmetric_and_self_similar() {
    let a = EmpiricalMeasure::new(stable_draws(2, 20_000, 0.7, 1.0)).unwrap();
    let neg = EmpiricalMeasure::new(a.values().iter().map(|x| -x).collect()).unwrap();
    assert!(ks_two_sample_p(&a, &neg) > 1e-3);
    // X(4dt) = 4^{1/α}X(dt) and X(c, dt) = X(1, c·dt) in law.
    let long = EmpiricalMeasure::new(stable_draws(3, 20_000, 0.7, 4.0)).unwrap();
    let scaled = EmpiricalMeasure::new(a.values().iter().map(|x| 4f64.powf(1.0 / 1.5) * x).collect()).unwrap();
    assert!(ks_two_sample_p(&long, &scaled) > 1e-3);
    let unit_c = EmpiricalMeasure::new(stable_draws(4, 20_000, 1.0, 0.7)).unwrap();
    assert!(ks_two_sample_p(&unit_c, &a) > 1e-3);
}

#[test]
fn transmission_only_leaves_the_free_process() {
    for i in 0..300 {
        let pts = sample_hat_z_pair_times(&mut sample_rng(5, 0, i), &TRANSMITTING, 1e3, &[0.1, 0.5, 1.0], 0.3).unwrap();
        for p in pts {
            assert!(!p.killed);
            assert_eq!(Some(p.position), p.free_position);
        }
    }
}

#[test]
fn interface_process_moves_with_the_modulus_of_the_free_one() {
    for i in 0..300 {
        let pts = sample_hat_z_pair_times(&mut sample_rng(6, 0, i), &DEFAULT, 1e3, &[0.2, 0.6, 1.0], -0.4).unwrap();
        for p in pts {
            if p.killed {
                assert_eq!(p.position, 0.0);
            } else {
                assert_eq!(p.position.abs(), p.free_position.unwrap().abs());
            }
        }
    }
}

#[test]
fn zero_time_and_zero_start() {
    assert_eq!(sample_hat_z_o(&mut sample_rng(1, 0, 0), &DEFAULT, 1e3, 0.0, 0.7).unwrap(), Some(0.7));
    assert_eq!(sample_hat_z_o(&mut sample_rng(1, 0, 0), &DEFAULT, 1e3, 1.0, 0.0), Err(LevyError::ZeroStart));
    let cfg = zeta_config();
    assert_eq!(sample_zeta_o(&mut sample_rng(1, 0, 0), &cfg, 0.0, -0.7).unwrap().position, -0.7);
    assert_eq!(sample_zeta_o(&mut sample_rng(1, 0, 0), &cfg, 1.0, 0.0), Err(LevyError::ZeroStart));
    assert_eq!(sample_zeta_o_times(&mut sample_rng(1, 0, 0), &cfg, &[0.5, 0.2], 1.0), Err(LevyError::InvalidTimes));
}

#[test]
fn coarse_zeta_steps_are_rejected() {
    let mut cfg = zeta_config();
    cfg.step_fraction = 0.1;
    assert!(matches!(cfg.check(), Err(LevyError::StepResolutionTooCoarse { .. })));
    cfg = zeta_config();
    cfg.p_plus = 0.9;
    assert_eq!(cfg.check(), Err(LevyError::InvalidConfig));
}

#[test]
fn survival_grows_with_the_distance_to_the_interface() {
    let grid = GridFunction::new(0.25, 0.25, vec![0.0; 8]);
    let s = survival_curve(&HatZProcess { model: &DEFAULT, lambda: 1e3 }, 0.5, &grid, 3000, 7).unwrap();
    assert!(s.values.values.windows(2).all(|w| w[1] >= w[0] - 0.03), "{:?}", s.values.values);
    assert!(s.values.values[7] > s.values.values[0] + 0.1);
    assert!(s.values.values.iter().all(|v| (0.0..=1.0).contains(v)));
    // No absorption means no killing.
    let s = survival_curve(&HatZProcess { model: &NON_ABSORBING, lambda: 1e3 }, 0.5, &grid, 200, 7).unwrap();
    assert!(s.values.values.iter().all(|v| *v == 1.0));
}

#[test]
fn kernel_is_dominated_by_the_thinning_envelope() {
    let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.05).collect();
    for lambda in [1e2, 1e4] {
        let table = JumpKernelTable::new(&DEFAULT, lambda);
        let r = table.envelope_ratio(&grid).unwrap();
        assert!(r > 0.0 && r <= 1.0, "{r}");
        let k: Vec<f64> = [0.05, 0.2, 1.0].iter().map(|&y| table.killing_rate(y)).collect();
        assert!(k[0] > k[1] && k[1] > k[2] && k[2] > 0.0, "{k:?}");
        assert_eq!(JumpKernelTable::new(&NON_ABSORBING, lambda).killing_rate(0.1), 0.0);
    }
}

#[test]
fn zeta_reflects_through_the_interface() {
    // ζ°(t, −y) has the law of −ζ°(t, y).
    let cfg = zeta_config();
    let n = 3000;
    let draw = |y: f64, seed: u64| -> Vec<f64> {
        (0..n as u64).map(|i| sample_zeta_o(&mut sample_rng(seed, 0, i), &cfg, 0.5, y).unwrap().position).collect()
    };
    let plus = EmpiricalMeasure::new(draw(0.8, 8)).unwrap();
    let minus = EmpiricalMeasure::new(draw(-0.8, 9).into_iter().map(|x| -x).collect()).unwrap();
    assert!(ks_two_sample_p(&plus, &minus) > 1e-3);
}

#[test]
fn zeta_reflection_keeps_the_starting_side() {
    let mut cfg = zeta_config();
    cfg.p_plus = 0.0;
    cfg.p_minus = 1.0;
    for i in 0..500 {
        let o = sample_zeta_o(&mut sample_rng(10, 0, i), &cfg, 0.5, 0.6).unwrap();
        assert!(o.position >= 0.0);
    }
}

#[test]
fn semigroup_is_sub_markov_and_starts_at_the_identity() {
    let zeta = ZetaProcess { config: zeta_config() };
    let u = GridFunction::symmetric(4.0, 0.125, |y| bump(y, 1.0, 1.0, 2.0));
    let query = GridFunction::new(0.25, 0.25, vec![0.0; 8]);
    let pu = semigroup_apply(&zeta, &u, 0.2, &query, 300, 11).unwrap();
    let surv = survival_curve(&zeta, 0.2, &query, 300, 11).unwrap();
    for j in 0..query.len() {
        // Common random numbers make the domination pathwise.
        assert!(pu.values.values[j] >= 0.0);
        assert!(pu.values.values[j] <= 2.0 * surv.values.values[j] + 1e-12);
    }
    let early = semigroup_apply(&zeta, &u, 1e-6, &query, 50, 12).unwrap();
    for j in 0..query.len() {
        assert!((early.values.values[j] - u.eval(query.node(j))).abs() < 0.02, "{j}");
    }
}

#[test]
fn semigroup_is_symmetric_within_noise() {
    let zeta = ZetaProcess { config: zeta_config() };
    let u = GridFunction::symmetric(4.0, 0.125, |y| bump(y, 1.0, 1.0, 1.0));
    let v = GridFunction::symmetric(4.0, 0.125, |y| bump(y, -0.5, 1.0, 1.0));
    let d = symmetry_defect(&zeta, &u, &v, 0.3, 4000, 13).unwrap();
    assert!(d.forward > 0.0 && d.backward > 0.0);
    assert!(d.defect < 4.0 * d.stderr + 1e-3, "{d:?}");
    let same = symmetry_defect(&zeta, &u, &u, 0.3, 200, 13).unwrap();
    assert_eq!(same.defect, 0.0);
    let empty = GridFunction::symmetric(4.0, 0.125, |_| 0.0);
    assert_eq!(symmetry_defect(&zeta, &u, &empty, 0.3, 10, 13), Err(LevyError::EmptySupport));
}

#[test]
fn symbol_quadratures_agree_and_vanish_at_zero() {
    for lambda in [1e2, 1e5] {
        assert_eq!(levy_symbol(&DEFAULT, lambda, 0.0).unwrap(), 0.0);
        for xi in [0.03, 0.7, 40.0, 3e3] {
            let a = levy_symbol(&DEFAULT, lambda, xi).unwrap();
            let b = levy_symbol_kspace(&DEFAULT, lambda, xi).unwrap();
            assert!((a / b - 1.0).abs() < 1e-9, "{lambda} {xi}: {a} {b}");
            assert_eq!(a, levy_symbol(&DEFAULT, lambda, -xi).unwrap());
        }
    }
}

#[test]
fn symbol_regimes() {
    // Far above λ^{1/α} the symbol saturates at λ/2; far below it approaches the stable symbol
    // r̄_*·A_α·(2π|ξ|)^α/2, with A_α = ∫(1 − cos u)|u|^{−1−α}du.
    let high = levy_symbol(&DEFAULT, 1e4, 1e6).unwrap() / 1e4;
    assert!((high - 0.5).abs() < 1e-3, "{high}");
    let stable = 0.8330405505833526 * 3.3420627 * (2.0 * std::f64::consts::PI).powf(1.5) / 2.0;
    let low: Vec<f64> = [1e4, 1e6, 1e8].iter().map(|&l| levy_symbol(&DEFAULT, l, 0.1).unwrap() / 0.1f64.powf(1.5)).collect();
    assert!(low[0] < low[1] && low[1] < low[2] && low[2] < stable, "{low:?}");
    assert!((low[2] / stable - 1.0).abs() < 0.01, "{low:?} vs {stable}");
}

#[test]
fn theta_star_is_resolved() {
    let a = theta_star(1.5);
    assert!((a - theta_star_with(1.5, 2000)).abs() < 1e-9);
    assert!((a - 0.290275).abs() < 1e-6, "{a}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interface_modulus_is_at_most_twice_the_free_one(seed in any::<u64>(), y in 0.05f64..1.0, delta in 0.02f64..0.3) {
        let (interface, free) = sample_hat_z_paths(&mut sample_rng(seed, 0, 0), &DEFAULT, 200.0, 1.0, y).unwrap();
        let a = d_modulus(&interface, delta, 1.0);
        let b = d_modulus(&free, delta, 1.0);
        prop_assert!(a <= 2.0 * b + 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn step_paths_are_cadlag(seed in any::<u64>()) {
        let (interface, _) = sample_hat_z_paths(&mut sample_rng(seed, 0, 0), &DEFAULT, 100.0, 0.5, 0.3).unwrap();
        prop_assert!(interface.times.windows(2).all(|w| w[1] >= w[0]));
        for (i, &t) in interface.times.iter().enumerate().skip(1) {
            if interface.times.get(i + 1) != Some(&t) {
                prop_assert_eq!(interface.value_at(t), interface.values[i]);
            }
        }
    }
}

#[test]
fn zeta_killing_matches_the_stable_hitting_time() {
    // P(T₀ ≤ 1) from y = 1 for the symmetric stable process with symbol (r̄_*/c_α)|ω|^α, by Abel
    // inversion of the first-passage renewal equation (independent quadrature, frozen).
    const HIT: f64 = 0.4507428525588376;
    let cfg = zeta_config();
    let (coarse, fine) = (cfg.clone().with_kill_tolerance(2e-3), cfg.with_kill_tolerance(1e-3));
    let w = 1.0 / (2f64.powf(0.5) - 1.0);
    let est: Vec<f64> = (0..12_000u64)
        .map(|i| {
            let kc = sample_zeta_o(&mut sample_rng(14, 0, i), &coarse, 1.0, 1.0).unwrap().killed as u8 as f64;
            let kf = sample_zeta_o(&mut sample_rng(14, 0, i), &fine, 1.0, 1.0).unwrap().killed as u8 as f64;
            kf + (kf - kc) * w
        })
        .collect();
    let (p, se) = kinetic_interface::numerics::sum::mean_and_stderr(&est);
    assert!((p - HIT).abs() < 4.0 * se, "{p} ± {se} vs {HIT}");
}
