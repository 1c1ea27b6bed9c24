use serde::{Deserialize, Serialize};

use super::{bind_observable, loglog_fit, EmpiricalDist, LineFit, ObservableSpec, Sampling};
use crate::error::{parameter, Result};
use crate::maps::{MapParams, MapSpec};
use crate::mc;

/// Normalizing sequence `B_n` for Birkhoff sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "exponent", rename_all = "snake_case")]
pub enum Normalization {
    SqrtN,
    NPow(f64),
    SqrtNLogN,
}

impl Normalization {
    pub fn factor(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            Normalization::SqrtN => n.sqrt(),
            Normalization::NPow(e) => n.powf(e),
            Normalization::SqrtNLogN => (n * n.ln()).sqrt(),
        }
    }
}

pub const MIN_BIRKHOFF_LENGTH: usize = 1_000;

/// Empirical law of `S_nφ / B_n` over `samples` initial points.
pub fn birkhoff_normalized_sums(
    spec: &MapSpec,
    phi: &ObservableSpec,
    n: usize,
    samples: usize,
    norm: Normalization,
    sampling: &Sampling,
    seed: u64,
) -> Result<EmpiricalDist> {
    if n < MIN_BIRKHOFF_LENGTH {
        return Err(parameter(format!("Birkhoff sums need n >= {MIN_BIRKHOFF_LENGTH} (got {n})")));
    }
    if samples == 0 {
        return Err(parameter("samples >= 1 required"));
    }
    sampling.validate()?;
    let map = spec.build();
    let f = bind_observable(spec, phi, sampling, seed)?;
    let b_n = norm.factor(n);
    let sums: Vec<f64> = mc::par_batches(seed, samples, sampling.batches, |rng, count, _| {
        let mut sampler = sampling.sampler(map, rng);
        (0..count)
            .map(|_| {
                let mut x = sampler.draw(rng);
                let mut s = 0.0;
                for _ in 0..n {
                    s += f.eval(x);
                    x = map.advance(x).0;
                }
                s / b_n
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    Ok(EmpiricalDist::new(sums))
}

/// Minimum exceedance count for a point of the curve to be kept.
pub const MIN_EXCEEDANCES: usize = 10;

/// `P(|S_nφ/n| > ε)` against `n`, with the fitted log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeDeviationCurve {
    pub n: Vec<usize>,
    pub prob: Vec<f64>,
    pub exceedances: Vec<usize>,
    /// Values of `n` dropped from the fit for having too few exceedances.
    pub dropped: Vec<usize>,
    pub fit: Option<LineFit>,
    /// `-ζ` for the map's return-time tail `n^{-(ζ+1)}`.
    pub predicted_slope: f64,
}

/// The exponent `ζ` with `m(τ_{I_0} > n) ≈ n^{-(ζ+1)}`.
pub fn tail_zeta(spec: &MapSpec) -> f64 {
    match spec.params {
        MapParams::Circle(p) => 1.0 / (p.gamma - 1.0),
        MapParams::Interval(p) => {
            let k = p.kappa * (p.gamma - 1.0);
            (1.0 - k) / k
        }
    }
}

pub fn large_deviation_curve(
    spec: &MapSpec,
    phi: &ObservableSpec,
    eps: f64,
    n_list: &[usize],
    samples: usize,
    sampling: &Sampling,
    seed: u64,
) -> Result<LargeDeviationCurve> {
    if !(eps > 0.0) {
        return Err(parameter("epsilon must be positive"));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(parameter("n_list must be nonempty with positive entries"));
    }
    sampling.validate()?;
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().expect("nonempty");
    let map = spec.build();
    let f = bind_observable(spec, phi, sampling, seed)?;
    let counts: Vec<Vec<usize>> = mc::par_batches(seed, samples, sampling.batches, |rng, count, _| {
        let mut sampler = sampling.sampler(map, rng);
        let mut hits = vec![0usize; ns.len()];
        for _ in 0..count {
            let mut x = sampler.draw(rng);
            let mut s = 0.0;
            let mut next = 0;
            for j in 1..=n_max {
                s += f.eval(x);
                x = map.advance(x).0;
                if j == ns[next] {
                    if (s / j as f64).abs() > eps {
                        hits[next] += 1;
                    }
                    next += 1;
                }
            }
        }
        hits
    });
    let exceedances: Vec<usize> = (0..ns.len()).map(|i| counts.iter().map(|c| c[i]).sum()).collect();
    let prob: Vec<f64> = exceedances.iter().map(|&e| e as f64 / samples as f64).collect();
    let (mut fx, mut fy, mut dropped) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &n) in ns.iter().enumerate() {
        if exceedances[i] < MIN_EXCEEDANCES {
            dropped.push(n);
        } else {
            fx.push(n as f64);
            fy.push(prob[i]);
        }
    }
    Ok(LargeDeviationCurve {
        n: ns,
        prob,
        exceedances,
        dropped,
        fit: loglog_fit(&fx, &fy),
        predicted_slope: -tail_zeta(spec),
    })
}
