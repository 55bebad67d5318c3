//! Symmetric α-stable increments and the limiting interface process `ζ°`.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, RngCore};
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::model::{DerivedConstants, Model};
use crate::numerics::special::stable_symbol_constant;
use crate::rng::unit;
use crate::stats::EmpiricalMeasure;

use super::{LevyError, ZETA_STEP_BUDGET};

/// Symmetric α-stable increment over time `dt` for the Lévy density `c|z|^{−1−α}`.
///
/// Chambers–Mallows–Stuck transform of a uniform angle and a unit exponential, scaled by
/// `σ = (c·A_α·dt)^{1/α}` where `A_α = ∫(1 − cos u)|u|^{−1−α}du`.
pub fn sample_stable_increment<R: RngCore + ?Sized>(rng: &mut R, alpha: f64, c: f64, dt: f64) -> f64 {
    let sigma = (c * stable_symbol_constant(alpha) * dt).powf(1.0 / alpha);
    sigma * standard_stable(rng, alpha)
}

/// Standard symmetric stable variable with characteristic function `exp(−|θ|^α)`.
#[inline]
pub fn standard_stable<R: RngCore + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    let v = FRAC_PI_2 * (2.0 * unit(rng.next_u64()) - 1.0);
    let w: f64 = rng.sample(Exp1);
    let sa = (alpha * v).sin();
    let c = v.cos();
    sa / c.powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Parameters of `ζ°`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StablePathConfig {
    pub alpha: f64,
    /// Coefficient `c` of the Lévy density `c|z|^{−1−α}`.
    pub scale: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    /// Per-step scale `σ(dt)` relative to the current distance to the interface.
    pub step_fraction: f64,
    /// Hitting tolerance `h`: the path is killed when `|ζ| < h` at a grid time.
    pub kill_tolerance: f64,
}

impl StablePathConfig {
    /// Limit of `Ẑ°_λ`: jump density `r̄_*|z|^{−1−α}` and `p_± = lim_{k→0} p_±(k)`.
    pub fn from_model(m: &Model, d: &DerivedConstants) -> Self {
        let p = m.probs(1e-300);
        let norm = p.p_plus + p.p_minus;
        Self {
            alpha: d.alpha,
            scale: d.r_bar_star,
            p_plus: p.p_plus / norm,
            p_minus: p.p_minus / norm,
            step_fraction: 1.0 / 50.0,
            kill_tolerance: 1e-3,
        }
    }

    pub fn with_kill_tolerance(mut self, h: f64) -> Self {
        self.kill_tolerance = h;
        self
    }

    pub fn check(&self) -> Result<(), LevyError> {
        let ok_probs = self.p_plus >= 0.0
            && self.p_minus >= 0.0
            && (self.p_plus + self.p_minus - 1.0).abs() < 1e-12;
        if !(self.alpha > 1.0 && self.alpha < 2.0) || !(self.scale > 0.0) || !ok_probs {
            return Err(LevyError::InvalidConfig);
        }
        if !(self.step_fraction > 0.0 && self.step_fraction <= 1.0 / 50.0)
            || !(self.kill_tolerance > 0.0)
        {
            return Err(LevyError::StepResolutionTooCoarse {
                step_fraction: self.step_fraction,
                kill_tolerance: self.kill_tolerance,
            });
        }
        Ok(())
    }
}

/// Outcome of one `ζ°` trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaOutcome {
    /// `ζ°(t, y)`; 0 once killed.
    pub position: f64,
    pub killed: bool,
    pub crossings: u32,
    pub steps: u64,
}

/// Samples `ζ°(t, y)`.
///
/// The time step is `dt = min(dt₀, (ε|x|/σ₁)^α)` with `σ₁ = (c·A_α)^{1/α}`, so the step scale never
/// exceeds the fraction `ε` of the current distance to the interface; `dt₀` is the same rule at
/// the starting point. A grid-level sign change draws `σ ∈ {±1}`; `|x| < h` kills.
pub fn sample_zeta_o<R: RngCore + ?Sized>(
    rng: &mut R,
    cfg: &StablePathConfig,
    t: f64,
    y: f64,
) -> Result<ZetaOutcome, LevyError> {
    Ok(sample_zeta_o_times(rng, cfg, &[t], y)?[0])
}

/// Samples `ζ°(t_i, y)` along one trajectory at nondecreasing times `t_i`.
///
/// Steps are truncated at each query time, so a single query reproduces [`sample_zeta_o`].
pub fn sample_zeta_o_times<R: RngCore + ?Sized>(
    rng: &mut R,
    cfg: &StablePathConfig,
    times: &[f64],
    y: f64,
) -> Result<Vec<ZetaOutcome>, LevyError> {
    cfg.check()?;
    if y == 0.0 {
        return Err(LevyError::ZeroStart);
    }
    let alpha = cfg.alpha;
    let sigma1 = (cfg.scale * stable_symbol_constant(alpha)).powf(1.0 / alpha);
    let dt_for = |dist: f64| (cfg.step_fraction * dist / sigma1).powf(alpha);
    let dt0 = dt_for(y.abs());
    let inv_alpha = 1.0 / alpha;
    let mut x = y;
    let mut sign = 1.0;
    let mut now = 0.0;
    let mut crossings = 0u32;
    let mut steps = 0u64;
    let mut killed = false;
    let mut out = Vec::with_capacity(times.len());
    let mut prev = 0.0;
    for &t in times {
        if !(t >= prev) || !t.is_finite() {
            return Err(LevyError::InvalidTimes);
        }
        prev = t;
        while !killed && now < t {
            if x.abs() < cfg.kill_tolerance {
                killed = true;
                break;
            }
            let dt = dt0.min(dt_for(x.abs())).min(t - now);
            steps += 1;
            if steps > ZETA_STEP_BUDGET || dt <= 0.0 {
                return Err(LevyError::StepResolutionTooCoarse {
                    step_fraction: cfg.step_fraction,
                    kill_tolerance: cfg.kill_tolerance,
                });
            }
            let next = x + sigma1 * dt.powf(inv_alpha) * standard_stable(rng, alpha);
            if (x > 0.0 && next <= 0.0) || (x < 0.0 && next >= 0.0) {
                crossings += 1;
                if unit(rng.next_u64()) >= cfg.p_plus {
                    sign = -sign;
                }
            }
            x = next;
            now += dt;
        }
        out.push(if killed {
            ZetaOutcome { position: 0.0, killed: true, crossings, steps }
        } else {
            ZetaOutcome { position: sign * x, killed: false, crossings, steps }
        });
    }
    Ok(out)
}

/// Distribution of `ζ°(t, y)` extrapolated to zero hitting tolerance.
///
/// With tolerance `h` the killed mass carries a bias `O(h^{α−1})` (a stable path started at
/// distance `h` escapes the interface with probability of that order), so the CDFs at `h` and
/// `h/2` are combined as `F₀ = F_{h/2} + (F_{h/2} − F_h)/(2^{α−1} − 1)`.
#[derive(Clone, Debug)]
pub struct ExtrapolatedLaw {
    pub coarse: EmpiricalMeasure,
    pub fine: EmpiricalMeasure,
    pub rate: f64,
}

impl ExtrapolatedLaw {
    pub fn new(coarse: EmpiricalMeasure, fine: EmpiricalMeasure, alpha: f64) -> Self {
        Self { coarse, fine, rate: alpha - 1.0 }
    }

    fn weight(&self) -> f64 {
        1.0 / (2f64.powf(self.rate) - 1.0)
    }

    /// Extrapolated CDF at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = (self.fine.cdf(x), self.coarse.cdf(x));
        a + (a - b) * self.weight()
    }

    fn cdf_left(&self, x: f64) -> f64 {
        let (a, b) = (self.fine.cdf_left(x), self.coarse.cdf_left(x));
        a + (a - b) * self.weight()
    }

    /// Kolmogorov distance to an empirical law, over all jump points of both sides.
    pub fn ks_distance(&self, other: &EmpiricalMeasure) -> f64 {
        let mut d: f64 = 0.0;
        let pts = self.fine.values().iter().chain(self.coarse.values()).chain(other.values());
        for &x in pts {
            d = d.max((self.cdf(x) - other.cdf(x)).abs());
            d = d.max((self.cdf_left(x) - other.cdf_left(x)).abs());
        }
        d
    }
}
