use serde::{Deserialize, Serialize};

use super::{bind_observable, ObservableSpec, Sampling};
use crate::error::{parameter, Result};
use crate::maps::MapSpec;
use crate::mc::{self, Estimate};

/// `C(n) = E[φ(T^n x) ψ(x)] - E[φ] E[ψ]` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub values: Vec<f64>,
    /// Batch-means standard errors.
    pub stderr: Vec<f64>,
    pub samples: usize,
}

impl Correlation {
    pub fn at(&self, n: usize) -> Estimate {
        Estimate {
            mean: self.values[n],
            stderr: self.stderr[n],
        }
    }
}

struct Sums {
    count: f64,
    psi: f64,
    phi: Vec<f64>,
    prod: Vec<f64>,
}

impl Sums {
    fn covariance(&self, n: usize) -> f64 {
        self.prod[n] / self.count - (self.phi[n] / self.count) * (self.psi / self.count)
    }
}

pub const MIN_CORRELATION_SAMPLES: usize = 10_000;

pub fn estimate_correlation(
    spec: &MapSpec,
    phi: &ObservableSpec,
    psi: &ObservableSpec,
    n_max: usize,
    samples: usize,
    sampling: &Sampling,
    seed: u64,
) -> Result<Correlation> {
    if samples < MIN_CORRELATION_SAMPLES {
        return Err(parameter(format!(
            "correlation estimates need at least {MIN_CORRELATION_SAMPLES} samples (got {samples})"
        )));
    }
    sampling.validate()?;
    let map = spec.build();
    let f = bind_observable(spec, phi, sampling, seed)?;
    let g = bind_observable(spec, psi, sampling, seed.wrapping_add(1))?;
    let batches = mc::par_batches(seed, samples, sampling.batches, |rng, count, _| {
        let mut sampler = sampling.sampler(map, rng);
        let mut s = Sums {
            count: count as f64,
            psi: 0.0,
            phi: vec![0.0; n_max + 1],
            prod: vec![0.0; n_max + 1],
        };
        for _ in 0..count {
            let x = sampler.draw(rng);
            let gx = g.eval(x);
            s.psi += gx;
            let mut y = x;
            for n in 0..=n_max {
                let fy = f.eval(y);
                s.phi[n] += fy;
                s.prod[n] += fy * gx;
                if n < n_max {
                    y = map.advance(y).0;
                }
            }
        }
        s
    });
    let total = Sums {
        count: batches.iter().map(|b| b.count).sum(),
        psi: batches.iter().map(|b| b.psi).sum(),
        phi: (0..=n_max).map(|n| batches.iter().map(|b| b.phi[n]).sum()).collect(),
        prod: (0..=n_max).map(|n| batches.iter().map(|b| b.prod[n]).sum()).collect(),
    };
    let mut values = Vec::with_capacity(n_max + 1);
    let mut stderr = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        values.push(total.covariance(n));
        let per_batch: Vec<f64> = batches.iter().filter(|b| b.count > 0.0).map(|b| b.covariance(n)).collect();
        stderr.push(Estimate::from_samples(&per_batch).stderr);
    }
    Ok(Correlation {
        values,
        stderr,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ObservableKind;

    #[test]
    fn lag_zero_is_a_variance() {
        let spec = MapSpec::circle(2.0).unwrap();
        let phi = ObservableSpec::new(ObservableKind::HolderPower { nu: 0.5, center: 0.3 });
        let c = estimate_correlation(&spec, &phi, &phi, 3, 20_000, &Sampling::default(), 4).unwrap();
        assert!(c.values[0] > 0.0);
        // Var of sqrt(U) with U uniform on [0,1] is 1/2 - 4/9.
        assert!((c.values[0] - (0.5 - 4.0 / 9.0)).abs() < 5.0 * c.stderr[0] + 1e-3);
    }

    #[test]
    fn too_few_samples_rejected() {
        let spec = MapSpec::circle(2.0).unwrap();
        let phi = ObservableSpec::indicator(-0.3, 0.3);
        assert!(estimate_correlation(&spec, &phi, &phi, 3, 100, &Sampling::default(), 1).is_err());
    }
}
