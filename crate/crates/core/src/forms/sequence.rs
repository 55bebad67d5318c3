//! The sign-product sequence `s_m = Σ_{ε∈{±1}^m, ∏ε=1} ∏ p_{ε_j}`.

use serde::Serialize;

/// `s_1..=s_{m_max}` from `s_1 = p₊`, `s_{m+1} = s_m p₊ + (1 − s_m) p₋` with `p₋ = 1 − p₊`.
pub fn s_sequence(p_plus: f64, m_max: usize) -> Vec<f64> {
    let p_minus = 1.0 - p_plus;
    let mut out = Vec::with_capacity(m_max);
    let mut s = p_plus;
    for _ in 0..m_max {
        out.push(s);
        s = s * p_plus + (1.0 - s) * p_minus;
    }
    out
}

/// Exact numerators `N_m` with `s_m = N_m/den^m` for `p₊ = num/den`, by the recurrence.
///
/// Returns `None` when `den^{m_max}` overflows `u128` or `num > den`.
pub fn s_sequence_exact(num: u64, den: u64, m_max: usize) -> Option<Vec<u128>> {
    if num > den || den == 0 {
        return None;
    }
    let (a, b, d) = (num as u128, (den - num) as u128, den as u128);
    d.checked_pow(m_max as u32)?;
    let mut out = Vec::with_capacity(m_max);
    let mut n = a;
    let mut scale = d;
    for m in 0..m_max {
        out.push(n);
        if m + 1 < m_max {
            n = n * a + (scale - n) * b;
            scale *= d;
        }
    }
    Some(out)
}

/// Exact numerator of `s_m` by enumerating all `2^m` sign sequences with product `+1`.
pub fn s_sequence_enumerated(num: u64, den: u64, m: u32) -> Option<u128> {
    if num > den || m == 0 || m > 40 {
        return None;
    }
    (den as u128).checked_pow(m)?;
    let (a, b) = (num as u128, (den - num) as u128);
    let pa: Vec<u128> = (0..=m).map(|k| a.pow(k)).collect();
    let pb: Vec<u128> = (0..=m).map(|k| b.pow(k)).collect();
    let mut total = 0u128;
    for mask in 0u64..(1u64 << m) {
        let minus = mask.count_ones();
        if minus % 2 == 0 {
            total += pa[(m - minus) as usize] * pb[minus as usize];
        }
    }
    Some(total)
}

/// Monotonicity pattern of a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SequencePattern {
    Constant,
    StrictlyDecreasing,
    /// Odd-indexed terms `s_1, s_3, …` increase and even-indexed terms decrease.
    OddIncreasingEvenDecreasing,
    Other,
}

impl SequencePattern {
    /// Pattern of exact terms `N_m/den^m`, `m = 1, 2, …`.
    pub fn of_exact(nums: &[u128], den: u64) -> Self {
        // Compare s_a and s_b (a < b) through N_a·den^{b−a} versus N_b.
        let cmp = |a: usize, b: usize| (nums[a] * (den as u128).pow((b - a) as u32)).cmp(&nums[b]);
        Self::classify(nums.len(), cmp)
    }

    /// Pattern of floating-point terms.
    pub fn of(values: &[f64]) -> Self {
        Self::classify(values.len(), |a, b| values[a].total_cmp(&values[b]))
    }

    fn classify(n: usize, cmp: impl Fn(usize, usize) -> std::cmp::Ordering) -> Self {
        use std::cmp::Ordering::*;
        if n < 3 {
            return SequencePattern::Other;
        }
        if (1..n).all(|i| cmp(i - 1, i) == Equal) {
            return SequencePattern::Constant;
        }
        if (1..n).all(|i| cmp(i - 1, i) == Greater) {
            return SequencePattern::StrictlyDecreasing;
        }
        // Index 0 holds s_1 (odd), index 1 holds s_2 (even).
        let odd_up = (2..n).step_by(2).all(|i| cmp(i - 2, i) == Less);
        let even_down = (3..n).step_by(2).all(|i| cmp(i - 2, i) == Greater);
        if odd_up && even_down {
            SequencePattern::OddIncreasingEvenDecreasing
        } else {
            SequencePattern::Other
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases_by_hand() {
        let s = s_sequence(0.7, 3);
        assert!((s[0] - 0.7).abs() < 1e-15);
        assert!((s[1] - 0.58).abs() < 1e-15);
        assert!((s[2] - 0.532).abs() < 1e-15);
        assert_eq!(s_sequence_exact(7, 10, 3).unwrap(), vec![7, 58, 532]);
        assert_eq!(s_sequence_enumerated(7, 10, 2), Some(58));
    }

    #[test]
    fn overflow_is_reported() {
        assert!(s_sequence_exact(1, 10, 40).is_none());
    }
}
