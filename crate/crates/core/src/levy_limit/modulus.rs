//! Càdlàg step paths and the Skorokhod D-modulus `ω′`.

use super::WindowExtrema;

/// Piecewise-constant càdlàg path: `values[i]` on `[times[i], times[i+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepPath {
    pub fn new(start: f64) -> Self {
        Self { times: vec![0.0], values: vec![start] }
    }

    pub fn push(&mut self, t: f64, v: f64) {
        self.times.push(t);
        self.values.push(v);
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&s| s <= t);
        self.values[i.saturating_sub(1)]
    }
}

/// `ω′(δ) = inf max_i osc_{[t_{i−1}, t_i)} f` over partitions of `[0, t*]` with all gaps `≥ δ`.
///
/// Partition points are taken among the jump epochs (moving a point back to the preceding epoch
/// never increases an oscillation). The value is found by bisection on `ω`: a threshold is
/// feasible when a left-to-right scan, using sliding-window extrema and prefix counts of
/// reachable points, reaches `t*`. If `t* < δ` the whole interval is the only partition.
pub fn d_modulus(path: &StepPath, delta: f64, t_star: f64) -> f64 {
    let mut cand = vec![0.0];
    let mut vals = vec![path.values[0]];
    for (t, v) in path.times.iter().zip(&path.values).skip(1) {
        if *t > 0.0 && *t < t_star {
            cand.push(*t);
            vals.push(*v);
        } else if *t == 0.0 {
            vals[0] = *v;
        }
    }
    cand.push(t_star);
    let total = {
        let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mn = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        mx - mn
    };
    if t_star < delta || total == 0.0 {
        return total;
    }
    let feasible = |omega: f64| -> bool {
        let n = cand.len();
        let mut reach = vec![false; n];
        let mut prefix = vec![0usize; n + 1];
        reach[0] = true;
        prefix[1] = 1;
        let mut window = WindowExtrema::default();
        let mut left = 0usize;
        let mut right = 0usize; // largest i with cand[i] ≤ cand[j] − δ, plus one
        for j in 1..n {
            window.push(j - 1, vals[j - 1]);
            while window.range() > omega && left < j - 1 {
                left += 1;
                window.evict_before(left);
            }
            while right < j && cand[right] <= cand[j] - delta {
                right += 1;
            }
            let ok_window = window.range() <= omega;
            reach[j] = ok_window && right > left && prefix[right] - prefix[left] > 0;
            prefix[j + 1] = prefix[j] + usize::from(reach[j]);
        }
        reach[n - 1]
    };
    let (mut lo, mut hi) = (0.0, total);
    if feasible(0.0) {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_single_jump() {
        let p = StepPath::new(1.0);
        assert_eq!(d_modulus(&p, 0.1, 1.0), 0.0);
        let mut q = StepPath::new(0.0);
        q.push(0.5, 2.0);
        assert_eq!(d_modulus(&q, 0.3, 1.0), 0.0);
        // Gap too small on either side: the jump cannot be isolated.
        assert_eq!(d_modulus(&q, 0.6, 1.0), 2.0);
    }

    #[test]
    fn brute_force_agreement() {
        let mut p = StepPath::new(0.0);
        let pts = [(0.1, 1.0), (0.25, -0.5), (0.3, 2.0), (0.55, 1.5), (0.8, 0.2)];
        for (t, v) in pts {
            p.push(t, v);
        }
        let delta = 0.2;
        // Enumerate all subsets of interior epochs.
        let epochs: Vec<f64> = pts.iter().map(|x| x.0).collect();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << epochs.len()) {
            let mut cuts = vec![0.0];
            for (i, e) in epochs.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    cuts.push(*e);
                }
            }
            cuts.push(1.0);
            if cuts.windows(2).any(|w| w[1] - w[0] < delta) {
                continue;
            }
            let mut worst: f64 = 0.0;
            for w in cuts.windows(2) {
                let mut vs = vec![p.value_at(w[0])];
                for (t, v) in p.times.iter().zip(&p.values) {
                    if *t > w[0] && *t < w[1] {
                        vs.push(*v);
                    }
                }
                let mx = vs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mn = vs.iter().cloned().fold(f64::INFINITY, f64::min);
                worst = worst.max(mx - mn);
            }
            best = best.min(worst);
        }
        assert!((d_modulus(&p, delta, 1.0) - best).abs() < 1e-12);
    }
}
