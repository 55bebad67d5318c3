//! The microscopic phonon process with interface and its λ-rescaled family.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::Exp1;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{InterfaceProbs, Model};
use crate::numerics::sum::mean_and_stderr;
use crate::rng::{sample_rng, unit, SampleRng};

/// Hard cap on the number of scattering steps of a single trajectory.
pub const PATH_STEP_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticError {
    #[error("trajectory exceeded the budget of {budget} steps")]
    PathBudgetExceeded { budget: u64 },
    #[error("starting position must be nonzero")]
    ZeroStart,
}

/// Frequencies `K_0 = k0, K_1, …` and unit-exponential waits `τ_0, τ_1, …` of one phonon.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyChain {
    pub k0: f64,
    pub states: Vec<f64>,
    pub taus: Vec<f64>,
}

impl FrequencyChain {
    /// Renewal times `𝔗_n = Σ_{j<n} t̄(K_j)τ_j`, `n = 0..=len`.
    pub fn renewal_times(&self, m: &Model) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.states.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for (k, tau) in self.states.iter().zip(&self.taus) {
            acc += m.t_bar(*k) * tau;
            out.push(acc);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Draws `n` steps of the chain. Per step the draw order is: frequency (except `K_0`), then `τ`.
pub fn sample_chain<R: RngCore + ?Sized>(rng: &mut R, m: &Model, k0: f64, n: usize) -> FrequencyChain {
    let sampler = m.frequency_sampler();
    let mut states = Vec::with_capacity(n);
    let mut taus = Vec::with_capacity(n);
    for j in 0..n {
        let k = if j == 0 { k0 } else { sampler.sample(rng) };
        states.push(k);
        taus.push(rng.sample::<f64, _>(Exp1));
    }
    FrequencyChain { k0, states, taus }
}

/// An interface crossing of the free skeleton between nodes `index − 1` and `index`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    /// Node index `n_m` of the first position on the new side.
    pub index: usize,
    /// Crossing time `s̃_m` of the linearly interpolated path on the Poisson clock.
    pub time: f64,
}

/// One realized trajectory of `Z̃_λ`, optionally with the interface mechanism applied.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub lambda: f64,
    /// Poisson clock epochs `0 = e_0 < e_1 < …` (one per node).
    pub jump_times: Vec<f64>,
    /// Free skeleton `Z_n^λ`.
    pub positions: Vec<f64>,
    pub crossing_log: Vec<Crossing>,
    /// `σ_m` for `m = 1..`, filled by [`apply_interface`]; absorption stops the list.
    pub signs: Vec<i8>,
    /// Time `s̃_𝔣` of absorption on the Poisson clock.
    pub absorbed_at: Option<f64>,
}

#[inline]
fn epoch_side(y: f64, m: usize) -> f64 {
    if m % 2 == 0 {
        y.signum()
    } else {
        -y.signum()
    }
}

/// Builds the rescaled skeleton `Z_n^λ = y − λ^{−1/α}Σ_{j<n} S(K_j)τ_j` with its Poisson clock of
/// intensity `λ`, and logs the interface crossings.
pub fn build_path<R: RngCore + ?Sized>(
    rng: &mut R,
    m: &Model,
    chain: &FrequencyChain,
    y: f64,
    lambda: f64,
) -> Result<PathSample, KineticError> {
    if y == 0.0 {
        return Err(KineticError::ZeroStart);
    }
    let scale = lambda.powf(-1.0 / m.alpha());
    let mut positions = Vec::with_capacity(chain.len() + 1);
    let mut jump_times = Vec::with_capacity(chain.len() + 1);
    positions.push(y);
    jump_times.push(0.0);
    let mut z = y;
    let mut e = 0.0;
    for (k, tau) in chain.states.iter().zip(&chain.taus) {
        z -= scale * m.s(*k) * tau;
        e += rng.sample::<f64, _>(Exp1) / lambda;
        positions.push(z);
        jump_times.push(e);
    }
    let crossing_log = scan_crossings(&positions, &jump_times, y);
    Ok(PathSample {
        lambda,
        jump_times,
        positions,
        crossing_log,
        signs: Vec::new(),
        absorbed_at: None,
    })
}

/// Crossings per the alternating sign rule; an exact zero landing counts as a crossing.
fn scan_crossings(positions: &[f64], times: &[f64], y: f64) -> Vec<Crossing> {
    let mut log = Vec::new();
    for n in 1..positions.len() {
        let side = epoch_side(y, log.len());
        if positions[n] * side <= 0.0 {
            let (a, b) = (positions[n - 1], positions[n]);
            let frac = if a == b { 1.0 } else { a / (a - b) };
            let time = times[n - 1] + frac.clamp(0.0, 1.0) * (times[n] - times[n - 1]);
            log.push(Crossing { index: n, time });
        }
    }
    log
}

/// Draws `σ ∈ {+1, −1, 0}` from a uniform level.
#[inline]
fn draw_sign(u: f64, p: InterfaceProbs) -> i8 {
    if u < p.p_plus {
        1
    } else if u < p.p_plus + p.p_minus {
        -1
    } else {
        0
    }
}

/// Draws the interface signs `σ_m ~ p(K_{n_m − 1})`; stops at the first absorption.
pub fn apply_interface<R: RngCore + ?Sized>(
    rng: &mut R,
    m: &Model,
    chain: &FrequencyChain,
    mut path: PathSample,
) -> PathSample {
    path.signs.clear();
    path.absorbed_at = None;
    for c in &path.crossing_log {
        let s = draw_sign(unit(rng.next_u64()), m.probs(chain.states[c.index - 1]));
        path.signs.push(s);
        if s == 0 {
            path.absorbed_at = Some(c.time);
            break;
        }
    }
    path
}

impl PathSample {
    /// Nodal interface positions `Z°_n`; zero from the absorbing crossing on.
    pub fn interface_positions(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.positions.len());
        let mut prod = 1.0;
        let mut m = 0;
        let mut dead = false;
        for (n, z) in self.positions.iter().enumerate() {
            while m < self.crossing_log.len() && self.crossing_log[m].index == n {
                match self.signs.get(m) {
                    Some(0) => dead = true,
                    Some(&s) => prod *= s as f64,
                    None => {}
                }
                m += 1;
            }
            out.push(if dead { 0.0 } else { prod * z });
        }
        out
    }

    /// Interpolated interface position `Z̃°_λ` at fractional node index `x`.
    pub fn interface_position_at_index(&self, x: f64) -> f64 {
        let last = self.positions.len() - 1;
        let x = x.clamp(0.0, last as f64);
        let n = (x.floor() as usize).min(last.saturating_sub(1));
        let f = x - n as f64;
        let (a, b) = (self.positions[n], self.positions[(n + 1).min(last)]);
        let free = a + f * (b - a);
        let mut prod = 1.0;
        for (m, c) in self.crossing_log.iter().enumerate() {
            let crossed = c.index <= n || (c.index == n + 1 && crossing_fraction(a, b) <= f);
            if !crossed {
                break;
            }
            match self.signs.get(m) {
                Some(0) => return 0.0,
                Some(&s) => prod *= s as f64,
                None => {}
            }
        }
        prod * free
    }
}

#[inline]
fn crossing_fraction(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        (a / (a - b)).clamp(0.0, 1.0)
    }
}

/// Position-frequency pair of the interface process at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KineticState {
    /// `Y°_λ(t, y, k)`; exactly 0 after absorption.
    pub position: f64,
    /// `K°_λ(t, k)`.
    pub frequency: f64,
    pub absorbed: bool,
    pub crossings: u32,
    pub steps: u64,
}

/// Samples `(Y°_λ(t, y, k), K°_λ(t, k))`.
///
/// `Y°_λ(t) = Z̃°_λ(𝒮_λ(t))` is the interface skeleton interpolated at the fractional node index
/// `𝔗⁻¹(λt)`, so the auxiliary Poisson clock cancels. The first draw seeds the independent
/// stream of interface signs; the chain is then drawn in the order of [`sample_chain`].
pub fn sample_y_o<R: RngCore + ?Sized>(
    rng: &mut R,
    m: &Model,
    lambda: f64,
    t: f64,
    y: f64,
    k: f64,
) -> Result<KineticState, KineticError> {
    let mut sigma_rng = SampleRng::seed_from_u64(rng.next_u64());
    sample_y_o_split(rng, &mut sigma_rng, m, lambda, t, y, k)
}

fn sample_y_o_split<R: RngCore + ?Sized>(
    rng: &mut R,
    sigma_rng: &mut SampleRng,
    m: &Model,
    lambda: f64,
    t: f64,
    y: f64,
    k: f64,
) -> Result<KineticState, KineticError> {
    if y == 0.0 {
        return Err(KineticError::ZeroStart);
    }
    if t <= 0.0 {
        return Ok(KineticState { position: y, frequency: k, absorbed: false, crossings: 0, steps: 0 });
    }
    let sampler = m.frequency_sampler();
    let scale = lambda.powf(-1.0 / m.alpha());
    let target = lambda * t;
    let mut clock = 0.0;
    let mut z = y;
    let mut side = y.signum();
    let mut prod = 1.0;
    let mut kc = k;
    let mut crossings = 0u32;
    let mut steps = 0u64;
    loop {
        if steps >= PATH_STEP_BUDGET {
            return Err(KineticError::PathBudgetExceeded { budget: PATH_STEP_BUDGET });
        }
        let tau: f64 = rng.sample(Exp1);
        let (tb, sk) = m.step_coefficients(kc);
        let dt = tb * tau;
        let z_next = z - scale * sk * tau;
        let crosses = z_next * side <= 0.0;
        steps += 1;
        if clock + dt >= target {
            let f = if dt > 0.0 { (target - clock) / dt } else { 1.0 };
            let free = z + f * (z_next - z);
            if crosses && crossing_fraction(z, z_next) <= f {
                crossings += 1;
                let s = draw_sign(unit(sigma_rng.next_u64()), m.probs(kc));
                if s == 0 {
                    return Ok(KineticState { position: 0.0, frequency: kc, absorbed: true, crossings, steps });
                }
                prod *= s as f64;
            }
            return Ok(KineticState {
                position: prod * free,
                frequency: prod * kc,
                absorbed: false,
                crossings,
                steps,
            });
        }
        if crosses {
            crossings += 1;
            let s = draw_sign(unit(sigma_rng.next_u64()), m.probs(kc));
            if s == 0 {
                return Ok(KineticState { position: 0.0, frequency: kc, absorbed: true, crossings, steps });
            }
            prod *= s as f64;
            side = -side;
        }
        clock += dt;
        z = z_next;
        kc = sampler.sample(rng);
    }
}

/// Path-based evaluation of `Y°_λ(t)` from an explicit chain and sign stream (test oracle for
/// [`sample_y_o`]). Returns `None` if the chain is too short to cover `λt`.
pub fn y_o_from_chain(
    m: &Model,
    chain: &FrequencyChain,
    sigma_rng: &mut SampleRng,
    lambda: f64,
    t: f64,
    y: f64,
) -> Option<KineticState> {
    let renewal = chain.renewal_times(m);
    let target = lambda * t;
    let n = renewal.partition_point(|&c| c <= target);
    if n == 0 || n > chain.len() {
        return None;
    }
    let node = n - 1;
    let f = (target - renewal[node]) / (renewal[node + 1] - renewal[node]);
    let mut dummy = SampleRng::seed_from_u64(0);
    let mut path = build_path(&mut dummy, m, chain, y, lambda).ok()?;
    // Keep only crossings reached by the query point.
    let (a, b) = (path.positions[node], path.positions[node + 1]);
    path.crossing_log
        .retain(|c| c.index <= node || (c.index == node + 1 && crossing_fraction(a, b) <= f));
    let path = apply_interface(sigma_rng, m, chain, path);
    let pos = path.interface_position_at_index(node as f64 + f);
    let prod: f64 = path.signs.iter().map(|&s| s as f64).product();
    Some(KineticState {
        position: pos,
        frequency: prod * chain.states[node],
        absorbed: path.absorbed_at.is_some(),
        crossings: path.signs.len() as u32,
        steps: n as u64,
    })
}

/// Monte Carlo estimate of `W(t, y, k) = 𝔼[W₀(Y°, K°)]` at each query point, with killed paths
/// contributing `T_o`. Sample `i` of point `j` uses the generator `(seed, j, i)`.
pub fn estimate_w<F>(
    m: &Model,
    lambda: f64,
    w0: F,
    t: f64,
    points: &[(f64, f64)],
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>, KineticError>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let t_o = m.params().t_o;
    points
        .iter()
        .enumerate()
        .map(|(j, &(y, k))| {
            let vals: Result<Vec<f64>, KineticError> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(seed, j as u64, i as u64);
                    let s = sample_y_o(&mut rng, m, lambda, t, y, k)?;
                    Ok(if s.absorbed { t_o } else { w0(s.position, s.frequency) })
                })
                .collect();
            Ok(mean_and_stderr(&vals?))
        })
        .collect()
}

/// Sup deviation `sup_{t ≤ t*} |𝒮_λ(t, k) − θ̄t|` of the rescaled clock.
///
/// `𝒮_λ` is piecewise linear with nodes at `t_n = 𝔗_n/λ`, where it equals `e_n/λ` for the
/// Poisson epochs `e_n`; the supremum is attained at a node or at `t*`.
pub fn clock_lln_gap<R: RngCore + ?Sized>(
    rng: &mut R,
    m: &Model,
    theta_bar: f64,
    lambda: f64,
    t_star: f64,
    k: f64,
) -> f64 {
    if t_star <= 0.0 {
        return 0.0;
    }
    let sampler = m.frequency_sampler();
    let target = lambda * t_star;
    let (mut renewal, mut epoch) = (0.0f64, 0.0f64);
    let mut gap: f64 = 0.0;
    let mut kc = k;
    loop {
        let dt = m.t_bar(kc) * rng.sample::<f64, _>(Exp1);
        let de: f64 = rng.sample(Exp1);
        if renewal + dt >= target {
            let f = (target - renewal) / dt;
            let s_end = (epoch + f * de) / lambda;
            return gap.max((s_end - theta_bar * t_star).abs());
        }
        renewal += dt;
        epoch += de;
        gap = gap.max((epoch - theta_bar * renewal).abs() / lambda);
        kc = sampler.sample(rng);
    }
}

/// Monte Carlo estimate of `P(yZ₁^λ < 0)` and the bound `exp(−|y|λ^{1/α}/|S(k)|)`.
pub fn first_crossing_vs_bound(
    m: &Model,
    lambda: f64,
    y: f64,
    k: f64,
    n: usize,
    seed: u64,
) -> (f64, f64) {
    let s = m.s(k);
    let scale = lambda.powf(-1.0 / m.alpha());
    let hits: usize = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, 0, i as u64);
            let tau: f64 = rng.sample(Exp1);
            usize::from(y * (y - scale * s * tau) < 0.0)
        })
        .sum();
    let bound = if s == 0.0 { 0.0 } else { (-y.abs() / (scale * s.abs())).exp() };
    (hits as f64 / n as f64, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    #[test]
    fn zero_time_returns_start() {
        let m = Model::new(ModelParams::default_model());
        let mut rng = sample_rng(1, 0, 0);
        let s = sample_y_o(&mut rng, &m, 100.0, 0.0, 0.7, 0.2).unwrap();
        assert_eq!(s.position, 0.7);
    }

    #[test]
    fn crossing_scan_alternates() {
        let pos = [1.0, 0.5, -0.5, -1.0, 0.2, 0.1];
        let times = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let log = scan_crossings(&pos, &times, 1.0);
        assert_eq!(log.iter().map(|c| c.index).collect::<Vec<_>>(), vec![2, 4]);
        assert!((log[0].time - 1.5).abs() < 1e-15);
    }
}
