//! Interpolation tables used by the samplers and the λ-forms.

use crate::numerics::quad::gk15;

use super::kernels::logistic_k;
use super::{InterfaceProbs, Model, Profile};

const FREQ_BITS: u32 = 16;
const FREQ_CELLS: usize = 1 << FREQ_BITS;
const FINE_CELLS: usize = 1 << 14;
/// Below this CDF level the frequency quantile is solved exactly instead of interpolated.
const FREQ_V_LO: f64 = 1.0 / 1024.0;
const TWO_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

#[inline]
fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * TWO_M53
}

/// Cubic Hermite interpolant on `[0, 1]` with end values and end slopes scaled to the unit cell.
#[inline]
fn hermite(t: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * d1
}

#[inline]
fn hermite_slope(t: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let t2 = t * t;
    (6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * d1
}

/// Solves `hermite(t) = target` on `[0, 1]` for a monotone cell by safeguarded Newton.
fn hermite_solve(target: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let increasing = y1 >= y0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut t = if y1 != y0 { ((target - y0) / (y1 - y0)).clamp(0.0, 1.0) } else { 0.5 };
    for _ in 0..100 {
        let g = hermite(t, y0, y1, d0, d1) - target;
        if (g < 0.0) == increasing {
            lo = t;
        } else {
            hi = t;
        }
        let d = hermite_slope(t, y0, y1, d0, d1);
        let mut next = if d != 0.0 { t - g / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() < 1e-15 || hi - lo < 1e-15 {
            return next;
        }
        t = next;
    }
    t
}

/// Inverse-CDF sampler for frequencies `K ~ R₂`.
///
/// `|K|` is drawn from a 2^16-cell linear-interpolation table of its quantile function; the
/// lowest CDF levels, where the quantile has an algebraic cusp at `k = 0`, are solved exactly.
#[derive(Debug, Clone)]
pub struct FrequencySampler {
    profile: Profile,
    table: Vec<f64>,
    cum: Vec<f64>,
    dk: f64,
    total: f64,
}

impl FrequencySampler {
    pub(crate) fn build(model: &Model) -> Self {
        let profile = model.params().r2.clone();
        let dk = 0.5 / FINE_CELLS as f64;
        let mut cum = Vec::with_capacity(FINE_CELLS + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        let mut f = |k: f64| 2.0 * profile.value(k);
        for j in 0..FINE_CELLS {
            let (v, _) = gk15(&mut f, j as f64 * dk, (j + 1) as f64 * dk);
            acc += v;
            cum.push(acc);
        }
        let total = acc;
        for c in cum.iter_mut() {
            *c /= total;
        }
        let mut s = Self { profile, table: Vec::new(), cum, dk, total };
        s.table = (0..=FREQ_CELLS)
            .map(|i| s.abs_quantile(i as f64 / FREQ_CELLS as f64))
            .collect();
        s
    }

    #[inline]
    fn density_abs(&self, k: f64) -> f64 {
        2.0 * self.profile.value(k)
    }

    /// CDF of `|K|` on `[0, 1/2]`.
    pub fn cdf_abs(&self, k: f64) -> f64 {
        if k <= 0.0 {
            return 0.0;
        }
        if k >= 0.5 {
            return 1.0;
        }
        let p = k / self.dk;
        let j = (p as usize).min(FINE_CELLS - 1);
        let t = p - j as f64;
        let (k0, k1) = (j as f64 * self.dk, (j + 1) as f64 * self.dk);
        let d0 = self.density_abs(k0) * self.dk / self.total;
        let d1 = self.density_abs(k1) * self.dk / self.total;
        hermite(t, self.cum[j], self.cum[j + 1], d0, d1)
    }

    /// Exact quantile of `|K|` at level `v ∈ [0, 1]`.
    pub fn abs_quantile(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 0.5;
        }
        let j = match self.cum.binary_search_by(|c| c.total_cmp(&v)) {
            Ok(j) => return j as f64 * self.dk,
            Err(j) => j - 1,
        };
        let (k0, k1) = (j as f64 * self.dk, (j + 1) as f64 * self.dk);
        let d0 = self.density_abs(k0) * self.dk / self.total;
        let d1 = self.density_abs(k1) * self.dk / self.total;
        let t = hermite_solve(v, self.cum[j], self.cum[j + 1], d0, d1);
        let mut k = k0 + t * (k1 - k0);
        // Polish on the exact CDF; the cubic alone is not uniformly accurate near the cusp at 0.
        let mut f = |x: f64| self.density_abs(x) / self.total;
        for _ in 0..3 {
            let (g, _) = gk15(&mut f, k0, k);
            let d = f(k);
            if d <= 0.0 {
                break;
            }
            let next = (k - (self.cum[j] + g - v) / d).clamp(k0, k1);
            if next == k {
                break;
            }
            k = next;
        }
        k
    }

    /// Quantile of `|K|` as used by the sampler (table above the cusp, exact below).
    #[inline]
    pub fn abs_from_unit(&self, v: f64) -> f64 {
        if v >= FREQ_V_LO {
            let p = v * FREQ_CELLS as f64;
            let i = p as usize;
            let f = p - i as f64;
            let a = self.table[i];
            a + f * (self.table[i + 1] - a)
        } else {
            self.abs_quantile(v)
        }
    }

    /// Signed frequency from 64 random bits: bit 0 is the sign, the top 53 bits the level.
    #[inline]
    pub fn from_bits(&self, bits: u64) -> f64 {
        let a = self.abs_from_unit(unit_from_bits(bits));
        f64::from_bits(a.to_bits() | ((bits & 1) << 63))
    }

    #[inline]
    pub fn sample<R: rand::RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        self.from_bits(rng.next_u64())
    }
}

const CHART_LO: f64 = -80.0;
const CHART_HI: f64 = 40.0;
const CHART_STEP: f64 = 0.02;

const LN_X_MIN: f64 = -23.025_850_929_940_457; // ln 1e-10
const LN_X_MAX: f64 = 36.841_361_487_904_734; // ln 1e16
const LOG_NODES: usize = 6001;
const CORE_BITS: u32 = 16;
/// Core cells of width `2^{-16}` cover `u ∈ [0, 1 − 2^{-10})`.
const CORE_CELLS: usize = (1 << CORE_BITS) - (1 << (CORE_BITS - 10));
const FRAC_BITS: u32 = 53 - CORE_BITS;
const FRAC_MASK: u64 = (1 << FRAC_BITS) - 1;
const FRAC_SCALE: f64 = 1.0 / (1u64 << FRAC_BITS) as f64;
/// Levels above `1 − 2^{-10}` use the logarithmic tail table.
const TAIL_S0: f64 = 10.0;
const TAIL_S1: f64 = 53.0;
const TAIL_NODES: usize = 4097;

/// Tables for the unscaled jump law `X = S(K)τ`, the interface probabilities `p̃_ι(x) = p_ι(S⁻¹(|x|))`
/// and the unscaled killing integral `κ(x) = ∫_x^∞ p̃₀ r̄`.
#[derive(Debug, Clone)]
pub struct JumpTables {
    alpha: f64,
    dln: f64,
    probs: Vec<[f64; 3]>,
    ln_bar_r: Vec<f64>,
    ln_tail: Vec<f64>,
    kill: Vec<f64>,
    core: Vec<f64>,
    tail_ln_q: Vec<f64>,
    tail_ds: f64,
}

impl JumpTables {
    pub(crate) fn build(model: &Model) -> Self {
        let alpha = model.alpha();
        let dln = (LN_X_MAX - LN_X_MIN) / (LOG_NODES - 1) as f64;
        let xs: Vec<f64> = (0..LOG_NODES).map(|i| (LN_X_MIN + i as f64 * dln).exp()).collect();
        let focus: Vec<f64> = xs.iter().map(|&x| model.s_inverse(x).unwrap_or(0.25)).collect();
        let probs: Vec<[f64; 3]> = focus
            .iter()
            .map(|&k| {
                let p = model.probs(k);
                [p.p_plus, p.p_minus, p.p_zero]
            })
            .collect();
        // Every jump-law integral is ∫_0^{1/2} R₂(k) g(S(k)) e^{−x/S(k)} dk. In the logistic chart the
        // integrand is analytic and decays at both ends, so the trapezoid rule converges geometrically.
        let h = CHART_STEP;
        let chart: Vec<(f64, f64)> = (0..)
            .map(|j| CHART_LO + j as f64 * h)
            .take_while(|&s| s <= CHART_HI)
            .filter_map(|s| {
                let (k, jac) = logistic_k(s);
                let sk = model.s(k);
                (sk > 0.0 && sk.is_finite() && jac > 0.0).then(|| (model.r2(k) * jac * h, sk))
            })
            .collect();
        let mut bar_r = Vec::with_capacity(LOG_NODES);
        let mut tail = Vec::with_capacity(LOG_NODES);
        let mut head = Vec::with_capacity(LOG_NODES);
        for &x in &xs {
            let (mut br, mut t, mut hd) = (0.0, 0.0, 0.0);
            for &(w, sk) in &chart {
                let a = x / sk;
                hd -= w * (-a).exp_m1();
                if a < 745.0 {
                    let e = (-a).exp();
                    br += w / sk * e;
                    t += w * e;
                }
            }
            bar_r.push(br);
            tail.push(2.0 * t);
            head.push(2.0 * hd);
        }
        let ln_bar_r: Vec<f64> = bar_r.iter().map(|v| v.ln()).collect();
        let ln_tail: Vec<f64> = tail.iter().map(|v| v.ln()).collect();

        let mut kill = vec![0.0; LOG_NODES];
        let last = LOG_NODES - 1;
        kill[last] = probs[last][2] * bar_r[last] * xs[last] / alpha;
        for i in (0..last).rev() {
            let f0 = probs[i][2] * bar_r[i] * xs[i];
            let f1 = probs[i + 1][2] * bar_r[i + 1] * xs[i + 1];
            kill[i] = kill[i + 1] + 0.5 * dln * (f0 + f1);
        }

        // Quantile of |X|: monotone Hermite inversion in (ln x, ln F) below the median and
        // (ln x, ln T) above it; slopes come from the density 2r̄.
        let slope_head: Vec<f64> =
            (0..LOG_NODES).map(|i| 2.0 * bar_r[i] * xs[i] / head[i]).collect();
        let slope_tail: Vec<f64> =
            (0..LOG_NODES).map(|i| -2.0 * bar_r[i] * xs[i] / tail[i]).collect();
        let ln_head: Vec<f64> = head.iter().map(|v| v.ln()).collect();
        let invert = |level_ln: f64, ys: &[f64], ds: &[f64]| -> f64 {
            let increasing = ys[last] > ys[0];
            let j = if increasing {
                ys.partition_point(|&y| y < level_ln)
            } else {
                ys.partition_point(|&y| y > level_ln)
            };
            let j = j.clamp(1, last);
            let (y0, y1) = (ys[j - 1], ys[j]);
            let t = hermite_solve(level_ln, y0, y1, ds[j - 1] * dln, ds[j] * dln);
            LN_X_MIN + (j as f64 - 1.0 + t) * dln
        };
        let core_du = (-(CORE_BITS as f64)).exp2();
        let core: Vec<f64> = (0..=CORE_CELLS)
            .map(|i| {
                let u = i as f64 * core_du;
                if i == 0 {
                    0.0
                } else if u < 0.5 {
                    invert(u.ln(), &ln_head, &slope_head).exp()
                } else {
                    invert((1.0 - u).ln(), &ln_tail, &slope_tail).exp()
                }
            })
            .collect();
        let tail_ds = (TAIL_S1 - TAIL_S0) / (TAIL_NODES - 1) as f64;
        let tail_ln_q: Vec<f64> = (0..TAIL_NODES)
            .map(|j| {
                let s = TAIL_S0 + j as f64 * tail_ds;
                invert(-s * std::f64::consts::LN_2, &ln_tail, &slope_tail)
            })
            .collect();
        Self { alpha, dln, probs, ln_bar_r, ln_tail, kill, core, tail_ln_q, tail_ds }
    }

    #[inline]
    fn locate(&self, x: f64) -> (usize, f64) {
        let p = ((x.ln() - LN_X_MIN) / self.dln).clamp(0.0, (LOG_NODES - 1) as f64 - 1e-9);
        let i = p as usize;
        (i, p - i as f64)
    }

    /// Interface probabilities `p_ι(S⁻¹(|x|))` for an unscaled jump of size `x`.
    #[inline]
    pub fn ptilde(&self, x: f64) -> InterfaceProbs {
        let (i, f) = self.locate(x.abs());
        let a = &self.probs[i];
        let b = &self.probs[i + 1];
        InterfaceProbs {
            p_plus: a[0] + f * (b[0] - a[0]),
            p_minus: a[1] + f * (b[1] - a[1]),
            p_zero: a[2] + f * (b[2] - a[2]),
        }
    }

    /// Interpolated unscaled jump density `r̄(x)`.
    pub fn bar_r(&self, x: f64) -> f64 {
        let x = x.abs();
        let lx = x.ln();
        if lx > LN_X_MAX {
            return (self.ln_bar_r[LOG_NODES - 1] - (1.0 + self.alpha) * (lx - LN_X_MAX)).exp();
        }
        let (i, f) = self.locate(x);
        (self.ln_bar_r[i] + f * (self.ln_bar_r[i + 1] - self.ln_bar_r[i])).exp()
    }

    /// Interpolated `P(|X| > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        let x = x.abs();
        let lx = x.ln();
        if lx > LN_X_MAX {
            return (self.ln_tail[LOG_NODES - 1] - self.alpha * (lx - LN_X_MAX)).exp();
        }
        let (i, f) = self.locate(x);
        (self.ln_tail[i] + f * (self.ln_tail[i + 1] - self.ln_tail[i])).exp()
    }

    /// Unscaled killing integral `κ(x) = ∫_{|x|}^∞ p̃₀(w) r̄(w) dw`.
    pub fn killing_integral(&self, x: f64) -> f64 {
        let x = x.abs();
        if x.ln() > LN_X_MAX {
            let last = LOG_NODES - 1;
            return self.kill[last] * ((LN_X_MAX - x.ln()) * self.alpha).exp();
        }
        let (i, f) = self.locate(x);
        self.kill[i] + f * (self.kill[i + 1] - self.kill[i])
    }

    /// Killing rate `k_λ(y) = λ κ(λ^{1/α}|y|)`.
    pub fn killing_rate(&self, lambda: f64, y: f64) -> f64 {
        lambda * self.killing_integral(lambda.powf(1.0 / self.alpha) * y)
    }

    /// Quantile of `|X|` at level `u ∈ [0, 1)` as used by the sampler.
    #[inline]
    pub fn abs_jump_quantile(&self, u: f64) -> f64 {
        let p = u * (1u64 << CORE_BITS) as f64;
        if p < CORE_CELLS as f64 {
            let i = p as usize;
            self.core_lerp(i, p - i as f64)
        } else {
            self.tail_quantile(u)
        }
    }

    #[inline]
    fn core_lerp(&self, i: usize, f: f64) -> f64 {
        let a = self.core[i];
        a + f * (self.core[i + 1] - a)
    }

    #[cold]
    fn tail_quantile(&self, u: f64) -> f64 {
        let s = -(1.0 - u).log2();
        let q = ((s - TAIL_S0) / self.tail_ds).clamp(0.0, (TAIL_NODES - 1) as f64 - 1e-9);
        let j = q as usize;
        let f = q - j as f64;
        (self.tail_ln_q[j] + f * (self.tail_ln_q[j + 1] - self.tail_ln_q[j])).exp()
    }

    /// Signed unscaled jump from 64 random bits: bit 0 is the sign, the top 53 bits the level
    /// `u`, whose leading 16 bits index the core cell directly.
    #[inline]
    pub fn jump_from_bits(&self, bits: u64) -> f64 {
        let i = (bits >> (64 - CORE_BITS)) as usize;
        let a = if i < CORE_CELLS {
            let f = ((bits >> 11) & FRAC_MASK) as f64 * FRAC_SCALE;
            self.core_lerp(i, f)
        } else {
            self.tail_quantile(unit_from_bits(bits))
        };
        f64::from_bits(a.to_bits() | ((bits & 1) << 63))
    }

    /// Signed unscaled jump from a 32-bit word: bit 0 is the sign, bits 16..32 the core cell and
    /// bits 1..16 the position inside it. Tail cells (probability `2^{-10}`) refine the level
    /// with 53 fresh bits from `refine`.
    #[inline]
    pub fn jump_from_word<F: FnOnce() -> u64>(&self, w: u32, refine: F) -> f64 {
        let i = (w >> 16) as usize;
        let a = if i < CORE_CELLS {
            let f = ((w >> 1) & 0x7FFF) as f64 * (1.0 / 32768.0);
            self.core_lerp(i, f)
        } else {
            let u = (i as f64 + unit_from_bits(refine())) * (1.0 / 65536.0);
            self.tail_quantile(u)
        };
        f64::from_bits(a.to_bits() | (u64::from(w & 1) << 63))
    }
}
