//! Empirical measures and the goodness-of-fit statistics used by the experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::numerics::sum::CompensatedSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empirical measure needs at least one sample")]
    Empty,
    #[error("weights must be positive and finite (index {index})")]
    BadWeight { index: usize },
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("observed and expected counts differ in length")]
    LengthMismatch,
}

/// Weighted sample set over ℝ with CDF, Kolmogorov–Smirnov and Wasserstein queries.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    values: Vec<f64>,
    /// Cumulative weights, ending at exactly 1.
    cum: Vec<f64>,
    n_eff: f64,
}

impl EmpiricalMeasure {
    /// Equally weighted measure.
    pub fn new(samples: Vec<f64>) -> Result<Self, StatsError> {
        let n = samples.len();
        Self::weighted(samples, vec![1.0; n])
    }

    /// Measure with positive weights (normalized internally).
    pub fn weighted(samples: Vec<f64>, weights: Vec<f64>) -> Result<Self, StatsError> {
        if samples.is_empty() || samples.len() != weights.len() {
            return Err(StatsError::Empty);
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite { index });
        }
        if let Some(index) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(StatsError::BadWeight { index });
        }
        let mut pairs: Vec<(f64, f64)> = samples.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).collect::<CompensatedSum>().value();
        let sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
        let mut values = Vec::with_capacity(pairs.len());
        let mut cum = Vec::with_capacity(pairs.len());
        let mut acc = CompensatedSum::new();
        for (v, w) in &pairs {
            acc.add(*w);
            values.push(*v);
            cum.push(acc.value() / total);
        }
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
        Ok(Self { values, cum, n_eff: total * total / sq })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted sample values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Kish effective sample size.
    pub fn effective_size(&self) -> f64 {
        self.n_eff
    }

    /// Right-continuous CDF `F(x) = μ((−∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|&v| v <= x);
        if i == 0 {
            0.0
        } else {
            self.cum[i - 1]
        }
    }

    /// Left limit `F(x−) = μ((−∞, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|&v| v < x);
        if i == 0 {
            0.0
        } else {
            self.cum[i - 1]
        }
    }

    pub fn mean(&self) -> f64 {
        let mut s = CompensatedSum::new();
        let mut prev = 0.0;
        for (v, c) in self.values.iter().zip(&self.cum) {
            s.add(v * (c - prev));
            prev = *c;
        }
        s.value()
    }

    /// Smallest sample value `x` with `F(x) ≥ q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let i = self.cum.partition_point(|&c| c < q).min(self.values.len() - 1);
        self.values[i]
    }

    /// Two-sample Kolmogorov–Smirnov distance `sup |F − G|`.
    pub fn ks_distance(&self, other: &EmpiricalMeasure) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (mut fa, mut fb) = (0.0, 0.0);
        let mut d: f64 = 0.0;
        while i < self.values.len() || j < other.values.len() {
            let x = match (self.values.get(i), other.values.get(j)) {
                (Some(&a), Some(&b)) => a.min(b),
                (Some(&a), None) => a,
                (None, Some(&b)) => b,
                (None, None) => break,
            };
            while i < self.values.len() && self.values[i] <= x {
                fa = self.cum[i];
                i += 1;
            }
            while j < other.values.len() && other.values[j] <= x {
                fb = other.cum[j];
                j += 1;
            }
            d = d.max((fa - fb).abs());
        }
        d
    }

    /// One-sample Kolmogorov–Smirnov distance to a continuous CDF.
    pub fn ks_distance_to<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let mut d: f64 = 0.0;
        let mut prev = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let g = cdf(v);
            d = d.max((self.cum[i] - g).abs()).max((prev - g).abs());
            prev = self.cum[i];
        }
        d
    }

    /// 1-Wasserstein distance `∫|F − G| dx`.
    pub fn wasserstein1(&self, other: &EmpiricalMeasure) -> f64 {
        let mut pts: Vec<f64> = self.values.iter().chain(&other.values).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut s = CompensatedSum::new();
        for w in pts.windows(2) {
            s.add((self.cdf(w[0]) - other.cdf(w[0])).abs() * (w[1] - w[0]));
        }
        s.value()
    }
}

/// Asymptotic Kolmogorov survival function `Q(x) = 2Σ(−1)^{j−1} e^{−2j²x²}`.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * x * x).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// p-value of a KS distance `d` at effective sample size `n` (Stephens' small-sample correction).
pub fn ks_p_value(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)
}

/// p-value of the two-sample KS test.
pub fn ks_two_sample_p(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    let (na, nb) = (a.effective_size(), b.effective_size());
    ks_p_value(a.ks_distance(b), na * nb / (na + nb))
}

/// Pearson chi-square goodness-of-fit p-value.
pub fn chi_square_p(observed: &[u64], expected: &[f64]) -> Result<f64, StatsError> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(StatsError::LengthMismatch);
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).expect("positive degrees of freedom");
    Ok(1.0 - dist.cdf(stat))
}

/// Median of a slice (average of the two central values for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_is_right_continuous() {
        let m = EmpiricalMeasure::new(vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(m.cdf(1.0), 0.75);
        assert_eq!(m.cdf_left(1.0), 0.25);
        assert_eq!(m.cdf(-1.0), 0.0);
        assert_eq!(m.cdf(5.0), 1.0);
    }

    #[test]
    fn ks_to_self_is_zero() {
        let m = EmpiricalMeasure::new(vec![3.0, -1.0, 2.0, 2.0]).unwrap();
        assert_eq!(m.ks_distance(&m), 0.0);
        assert_eq!(m.wasserstein1(&m), 0.0);
    }

    #[test]
    fn shifted_point_masses() {
        let a = EmpiricalMeasure::new(vec![0.0]).unwrap();
        let b = EmpiricalMeasure::new(vec![0.5]).unwrap();
        assert_eq!(a.ks_distance(&b), 1.0);
        assert!((a.wasserstein1(&b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Q(1.36) ≈ 0.049 and Q(1.63) ≈ 0.010 are the classical 5% and 1% points.
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 5e-4);
    }

    #[test]
    fn chi_square_uniform_counts() {
        let p = chi_square_p(&[100, 100, 100], &[100.0, 100.0, 100.0]).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }
}
