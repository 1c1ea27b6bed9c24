use serde::{Deserialize, Serialize};

/// Sorted sample with equal weights `1/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    sorted: Vec<f64>,
}

impl EmpiricalDist {
    /// Builds from raw samples. NaNs are rejected by panicking since they
    /// signal a bug upstream.
    pub fn new(mut samples: Vec<f64>) -> Self {
        assert!(samples.iter().all(|x| !x.is_nan()), "NaN in sample");
        samples.sort_by(f64::total_cmp);
        Self { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// `F_n(x) = #{x_i ≤ x}/n`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// `F_n(x-) = #{x_i < x}/n`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.len() as f64
    }

    /// Lower empirical quantile.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.len();
        let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.len() as f64
    }

    /// Second moment about zero.
    pub fn second_moment(&self) -> f64 {
        self.sorted.iter().map(|x| x * x).sum::<f64>() / self.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.sorted.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (self.len() as f64 - 1.0).max(1.0)
    }

    /// `(1/n) Σ min(x_i, t)`: for rescaled return times this is `∫₀ᵗ (1 - F̂(s)) ds`.
    pub fn integrated_survival(&self, t: f64) -> f64 {
        self.sorted.iter().map(|&x| x.min(t)).sum::<f64>() / self.len() as f64
    }

    /// Distinct values with the empirical CDF just below and at each.
    fn steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.len() as f64;
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= self.sorted.len() {
                return None;
            }
            let v = self.sorted[i];
            let below = i as f64 / n;
            while i < self.sorted.len() && self.sorted[i] == v {
                i += 1;
            }
            Some((v, below, i as f64 / n))
        })
    }
}

/// `sup_x |F_n(x) - F(x)|` for a continuous reference CDF `F`.
///
/// Ties are handled by evaluating both one-sided limits of `F_n` at each
/// distinct sample value.
pub fn ks_distance<F: Fn(f64) -> f64>(dist: &EmpiricalDist, cdf: F) -> f64 {
    assert!(!dist.is_empty(), "empty sample");
    dist.steps()
        .map(|(v, below, at)| {
            let f = cdf(v);
            (f - below).abs().max((at - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &EmpiricalDist, b: &EmpiricalDist) -> f64 {
    let mut d: f64 = 0.0;
    for (v, _, at) in a.steps() {
        d = d.max((at - b.cdf(v)).abs());
    }
    for (v, _, at) in b.steps() {
        d = d.max((at - a.cdf(v)).abs());
    }
    d
}

/// Empirical probability mass function on `0, 1, 2, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    pub probs: Vec<f64>,
    pub samples: usize,
}

impl Pmf {
    pub fn from_counts(counts: &[usize]) -> Self {
        let samples = counts.len();
        let max = counts.iter().copied().max().unwrap_or(0);
        let mut hist = vec![0usize; max + 1];
        for &c in counts {
            hist[c] += 1;
        }
        let n = samples.max(1) as f64;
        Self {
            probs: hist.into_iter().map(|h| h as f64 / n).collect(),
            samples,
        }
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    /// Total variation over `k ≤ k_max` with the remaining mass lumped into
    /// one cell: `½ Σ_{k≤k_max} |p_k - q_k| + ½ |p_{>k_max} - q_{>k_max}|`.
    pub fn total_variation<F: Fn(usize) -> f64>(&self, reference: F, k_max: usize) -> f64 {
        let mut sum = 0.0;
        let (mut p_head, mut q_head) = (0.0, 0.0);
        for k in 0..=k_max {
            let (p, q) = (self.prob(k), reference(k));
            sum += (p - q).abs();
            p_head += p;
            q_head += q;
        }
        0.5 * (sum + ((1.0 - p_head) - (1.0 - q_head)).abs())
    }
}

/// Poisson pmf `t^k e^{-t}/k!`.
pub fn poisson_pmf(t: f64, k: usize) -> f64 {
    let log = k as f64 * t.ln() - t - libm::lgamma(k as f64 + 1.0);
    if t == 0.0 {
        if k == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        log.exp()
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc;
    use rand::Rng;

    #[test]
    fn self_distance_is_at_most_one_over_n() {
        let mut rng = mc::rng_for(3, 0);
        let d = EmpiricalDist::new((0..1000).map(|_| rng.random::<f64>()).collect());
        let ks = ks_distance(&d, |x| d.cdf(x));
        assert!(ks <= 1.0 / 1000.0 + 1e-15);
    }

    #[test]
    fn uniform_sample_ks_scale() {
        let mut rng = mc::rng_for(5, 0);
        let n = 1_000_000;
        let d = EmpiricalDist::new((0..n).map(|_| rng.random::<f64>()).collect());
        let ks = ks_distance(&d, |x| x.clamp(0.0, 1.0));
        // √n·D is Kolmogorov distributed; P(√n D > 1.5) ≈ 0.022.
        assert!(ks * (n as f64).sqrt() < 1.5, "{ks}");
    }

    #[test]
    fn point_mass_vs_gaussian() {
        let d = EmpiricalDist::new(vec![0.0; 10]);
        assert!((ks_distance(&d, normal_cdf) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ties_are_counted_once() {
        let d = EmpiricalDist::new(vec![1.0, 1.0, 2.0, 3.0]);
        assert_eq!(d.cdf(1.0), 0.5);
        assert_eq!(d.cdf_left(1.0), 0.0);
        assert_eq!(d.quantile(0.5), 1.0);
        assert_eq!(d.quantile(0.75), 2.0);
    }

    #[test]
    fn poisson_reference() {
        assert!((poisson_pmf(1.0, 0) - (-1f64).exp()).abs() < 1e-15);
        let total: f64 = (0..40).map(|k| poisson_pmf(2.5, k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tv_of_exact_pmf_is_small() {
        let pmf = Pmf {
            probs: (0..30).map(|k| poisson_pmf(1.0, k)).collect(),
            samples: 1,
        };
        assert!(pmf.total_variation(|k| poisson_pmf(1.0, k), 5) < 1e-12);
    }

    #[test]
    fn integrated_survival_of_exponential() {
        let mut rng = mc::rng_for(9, 0);
        let d = EmpiricalDist::new((0..200_000).map(|_| -rng.random::<f64>().ln()).collect());
        for t in [0.5, 1.0, 2.0] {
            assert!((d.integrated_survival(t) - (1.0 - (-t).exp())).abs() < 0.01);
        }
        assert_eq!(d.integrated_survival(0.0), 0.0);
    }

    #[test]
    fn two_sample_ks_symmetric() {
        let a = EmpiricalDist::new(vec![0.0, 1.0, 2.0]);
        let b = EmpiricalDist::new(vec![0.5, 1.5]);
        assert_eq!(ks_two_sample(&a, &b), ks_two_sample(&b, &a));
    }
}
