//! The auxiliary interface jump process `Ẑ°_λ` by exact thinning of crossing jumps.

use rand::{Rng, RngCore};
use rand_distr::{Exp1, Poisson};

use crate::model::{JumpTables, Model};
use crate::rng::unit;

use super::{LevyError, StepPath, HAT_Z_JUMP_BUDGET};

/// State of `Ẑ°_λ` at one query time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HatZPoint {
    /// `Ẑ°_λ(t, y)`; 0 once killed.
    pub position: f64,
    /// The free process `Ẑ_λ(t, y)` driven by the same jumps; `None` after killing unless the
    /// free path was requested.
    pub free_position: Option<f64>,
    pub killed: bool,
}

/// Free position (unscaled), accumulated interface sign and kill flag.
struct Walker<'a> {
    tables: &'a JumpTables,
    q: f64,
    sign: f64,
    killed: bool,
    crossings: u64,
}

const BLOCK: usize = 8;

impl<'a> Walker<'a> {
    /// Draws `BLOCK` jumps from `BLOCK/2` random words.
    #[inline]
    fn draw_block<R: RngCore + ?Sized>(&self, rng: &mut R, x: &mut [f64; BLOCK]) {
        let mut words = [0u64; BLOCK / 2];
        for w in words.iter_mut() {
            *w = rng.next_u64();
        }
        for (j, w) in words.iter().enumerate() {
            x[2 * j] = self.tables.jump_from_word(*w as u32, || rng.next_u64());
            x[2 * j + 1] = self.tables.jump_from_word((*w >> 32) as u32, || rng.next_u64());
        }
    }

    #[inline]
    fn draw_one<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let w = rng.next_u64();
        self.tables.jump_from_word(w as u32, || rng.next_u64())
    }

    /// Applies `n` jumps. A jump `x` that takes the free path across 0 is transmitted, reflected or
    /// killed with probabilities `p̃_ι(|x|)`; killing at rate `k_λ(y) = ∫_{|y|}^∞ p̃₀ r̄_λ` is
    /// exactly the absorbing share of the crossing jumps. Jumps are drawn in blocks and the
    /// interface draws of a block follow its jumps. With `track_free` unset the walk stops at the
    /// killing jump.
    fn advance<R: RngCore + ?Sized>(
        &mut self,
        rng: &mut R,
        n: u64,
        track_free: bool,
    ) -> Result<(), LevyError> {
        let mut left = n;
        let mut x = [0.0; BLOCK];
        while left > 0 && !self.killed {
            let len = if left >= BLOCK as u64 {
                self.draw_block(rng, &mut x);
                BLOCK
            } else {
                x[0] = self.draw_one(rng);
                1
            };
            left -= len as u64;
            let mut q = self.q;
            let mut mask = 0u32;
            for (j, xj) in x.iter().take(len).enumerate() {
                let next = q + xj;
                mask |= (((q.to_bits() ^ next.to_bits()) >> 63) as u32 | u32::from(next == 0.0)) << j;
                q = next;
            }
            if mask != 0 {
                self.resolve_crossings(rng, &x[..len], mask)?;
            }
            self.q = q;
        }
        if self.killed && track_free {
            self.advance_free(rng, left);
        }
        Ok(())
    }

    #[cold]
    fn resolve_crossings<R: RngCore + ?Sized>(
        &mut self,
        rng: &mut R,
        x: &[f64],
        mut mask: u32,
    ) -> Result<(), LevyError> {
        while mask != 0 && !self.killed {
            let j = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            self.crossings += 1;
            let p = self.tables.ptilde(x[j]);
            if p.p_plus + p.p_minus > 1.0 + 1e-12 {
                return Err(LevyError::RateEnvelopeViolation { ratio: p.p_plus + p.p_minus });
            }
            let u = unit(rng.next_u64());
            if u >= p.p_plus + p.p_minus {
                self.killed = true;
            } else if u >= p.p_plus {
                self.sign = -self.sign;
            }
        }
        Ok(())
    }

    /// Moves only the free path (used after killing).
    fn advance_free<R: RngCore + ?Sized>(&mut self, rng: &mut R, n: u64) {
        for _ in 0..n {
            self.q += self.draw_one(rng);
        }
    }
}

/// Samples `Ẑ°_λ(t, y)` (with its free companion) at increasing times.
///
/// In unscaled units `x = λ^{1/α}y` jumps follow `r̄` at unit rate, so on `[t_{i−1}, t_i]` the
/// number of jumps is Poisson with mean `λ(t_i − t_{i−1})`.
pub fn sample_hat_z_o_times<R: RngCore + ?Sized>(
    rng: &mut R,
    m: &Model,
    lambda: f64,
    times: &[f64],
    y: f64,
) -> Result<Vec<HatZPoint>, LevyError> {
    run_times(rng, m, lambda, times, y, false)
}

/// As [`sample_hat_z_o_times`], continuing the free process after killing.
pub fn sample_hat_z_pair_times<R: RngCore + ?Sized>(
    rng: &mut R,
    m: &Model,
    lambda: f64,
    times: &[f64],
    y: f64,
) -> Result<Vec<HatZPoint>, LevyError> {
    run_times(rng, m, lambda, times, y, true)
}

fn run_times<R: RngCore + ?Sized>(
    rng: &mut R,
    m: &Model,
    lambda: f64,
    times: &[f64],
    y: f64,
    track_free: bool,
) -> Result<Vec<HatZPoint>, LevyError> {
    if y == 0.0 {
        return Err(LevyError::ZeroStart);
    }
    let scale = lambda.powf(1.0 / m.alpha());
    let mut w = Walker { tables: m.jump_tables(), q: scale * y, sign: 1.0, killed: false, crossings: 0 };
    let mut out = Vec::with_capacity(times.len());
    let mut prev = 0.0;
    let mut used = 0u64;
    for &t in times {
        let dt = t - prev;
        if dt < 0.0 || !dt.is_finite() {
            return Err(LevyError::InvalidTimes);
        }
        prev = t;
        if dt > 0.0 {
            let n = poisson(rng, lambda * dt)?;
            used += n;
            if used > HAT_Z_JUMP_BUDGET {
                return Err(LevyError::PathBudgetExceeded { budget: HAT_Z_JUMP_BUDGET });
            }
            if w.killed {
                if track_free {
                    w.advance_free(rng, n);
                }
            } else {
                w.advance(rng, n, track_free)?;
            }
        }
        out.push(HatZPoint {
            position: if w.killed { 0.0 } else { w.sign * w.q / scale },
            free_position: (!w.killed || track_free).then(|| w.q / scale),
            killed: w.killed,
        });
    }
    Ok(out)
}

fn poisson<R: RngCore + ?Sized>(rng: &mut R, mean: f64) -> Result<u64, LevyError> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|_| LevyError::InvalidTimes)?;
    Ok(rng.sample::<f64, _>(d) as u64)
}

/// `Ẑ°_λ(t, y)`, or `None` when killed by time `t`.
pub fn sample_hat_z_o<R: RngCore + ?Sized>(
    rng: &mut R,
    m: &Model,
    lambda: f64,
    t: f64,
    y: f64,
) -> Result<Option<f64>, LevyError> {
    let p = sample_hat_z_o_times(rng, m, lambda, &[t], y)?[0];
    Ok((!p.killed).then_some(p.position))
}

/// Full trajectories of `Ẑ°_λ` and of the free process on `[0, t*]` with explicit jump epochs.
pub fn sample_hat_z_paths<R: RngCore + ?Sized>(
    rng: &mut R,
    m: &Model,
    lambda: f64,
    t_star: f64,
    y: f64,
) -> Result<(StepPath, StepPath), LevyError> {
    if y == 0.0 {
        return Err(LevyError::ZeroStart);
    }
    let scale = lambda.powf(1.0 / m.alpha());
    let mut w = Walker { tables: m.jump_tables(), q: scale * y, sign: 1.0, killed: false, crossings: 0 };
    let mut interface = StepPath::new(y);
    let mut free = StepPath::new(y);
    let mut t = 0.0;
    let mut count = 0u64;
    loop {
        t += rng.sample::<f64, _>(Exp1) / lambda;
        if t > t_star {
            break;
        }
        count += 1;
        if count > HAT_Z_JUMP_BUDGET {
            return Err(LevyError::PathBudgetExceeded { budget: HAT_Z_JUMP_BUDGET });
        }
        if w.killed {
            w.advance_free(rng, 1);
            free.push(t, w.q / scale);
            continue;
        }
        w.advance(rng, 1, true)?;
        free.push(t, w.q / scale);
        interface.push(t, if w.killed { 0.0 } else { w.sign * w.q / scale });
    }
    Ok((interface, free))
}

/// Rescaled kernel data of `Ẑ°_λ`: jump kernel, thinning envelope and killing rate.
#[derive(Clone, Copy, Debug)]
pub struct JumpKernelTable<'a> {
    pub lambda: f64,
    /// `λ^{1/α}`: `r̄_λ(z) = λ^{1+1/α} r̄(λ^{1/α}z)`.
    pub envelope_scale: f64,
    tables: &'a JumpTables,
}

impl<'a> JumpKernelTable<'a> {
    pub fn new(m: &'a Model, lambda: f64) -> Self {
        Self { lambda, envelope_scale: lambda.powf(1.0 / m.alpha()), tables: m.jump_tables() }
    }

    /// `r̄_λ(z)`.
    pub fn bar_r_lambda(&self, z: f64) -> f64 {
        self.lambda * self.envelope_scale * self.tables.bar_r(self.envelope_scale * z)
    }

    /// Jump kernel `r̂_λ(y, y′)`. A transmitted crossing jump lands at `y′ = y + z`; a reflected one
    /// is mirrored back to `y′ = −(y + z)`, which gives the density `p̃₋(y + y′)r̄_λ(y + y′)` on the
    /// starting side.
    pub fn kernel(&self, y: f64, y2: f64) -> f64 {
        let p = |z: f64| self.tables.ptilde(self.envelope_scale * z);
        if y * y2 > 0.0 {
            let same = self.bar_r_lambda(y2 - y);
            let reflected = p(y + y2).p_minus * self.bar_r_lambda(y + y2);
            same + reflected
        } else if y * y2 < 0.0 {
            p(y2 - y).p_plus * self.bar_r_lambda(y2 - y)
        } else {
            0.0
        }
    }

    /// Proposal envelope `r̄_λ(y′ − y) + r̄_λ(y′ + y)`.
    pub fn envelope(&self, y: f64, y2: f64) -> f64 {
        self.bar_r_lambda(y2 - y) + self.bar_r_lambda(y2 + y)
    }

    /// Killing rate `k_λ(y) = λ κ(λ^{1/α}|y|)`.
    pub fn killing_rate(&self, y: f64) -> f64 {
        self.lambda * self.tables.killing_integral(self.envelope_scale * y)
    }

    /// Largest ratio `r̂_λ/envelope` over a test grid.
    pub fn envelope_ratio(&self, grid: &[f64]) -> Result<f64, LevyError> {
        let mut worst: f64 = 0.0;
        for &y in grid {
            for &y2 in grid {
                if y == 0.0 || y2 == 0.0 || y == y2 {
                    continue;
                }
                let env = self.envelope(y, y2);
                if env > 0.0 {
                    worst = worst.max(self.kernel(y, y2) / env);
                }
            }
        }
        if worst > 1.0 + 1e-12 {
            return Err(LevyError::RateEnvelopeViolation { ratio: worst });
        }
        Ok(worst)
    }
}
