//! Seeded, worker-count independent Monte Carlo plumbing.
//!
//! Work is cut into a fixed number of batches. Batch `i` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so the output depends on
//! `(seed, batches)` only and never on how rayon schedules the batches.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::maps::{Map, MapKind};

pub const DEFAULT_BATCHES: usize = 100;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sizes of `batches` near-equal parts of `total`.
pub fn split(total: usize, batches: usize) -> Vec<usize> {
    let batches = batches.clamp(1, total.max(1));
    let base = total / batches;
    let extra = total % batches;
    (0..batches).map(|i| base + usize::from(i < extra)).collect()
}

/// Runs `f(rng, count, batch)` over the batches of `total` in parallel and
/// returns the results in batch order.
pub fn par_batches<T, F>(seed: u64, total: usize, batches: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize, usize) -> T + Sync,
{
    let sizes = split(total, batches);
    sizes
        .into_par_iter()
        .enumerate()
        .map(|(i, count)| {
            let mut rng = rng_for(seed, i as u64);
            f(&mut rng, count, i)
        })
        .collect()
}

/// Uniform draw from `(-1, 1) \ {0}`.
#[inline]
pub fn uniform_open<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let x = 2.0 * rng.random::<f64>() - 1.0;
        if x != 0.0 && x != -1.0 {
            return x;
        }
    }
}

/// Uniform draw from `(lo, hi)`.
#[inline]
pub fn uniform_in<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let x = lo + (hi - lo) * rng.random::<f64>();
        if x > lo && x < hi {
            return x;
        }
    }
}

/// A mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Sample mean and `sd/√n`; for batch means this is the batch-mean error.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Self {
                mean,
                stderr: f64::INFINITY,
            };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            stderr: (var / n).sqrt(),
        }
    }
}

/// Steps of burn-in before an interval-map orbit is taken as stationary.
pub const DEFAULT_BURN_IN: usize = 1_000_000;

/// Draws points distributed (approximately) by the invariant measure.
///
/// For the circle map Lebesgue is invariant, so draws are iid uniform. For the
/// interval map one orbit per batch is burned in and then thinned.
#[derive(Debug, Clone)]
pub struct InvariantSampler {
    map: Map,
    thin: usize,
    state: Option<f64>,
}

impl InvariantSampler {
    pub fn new<R: Rng>(map: Map, rng: &mut R, burn_in: usize, thin: usize) -> Self {
        let state = match map.kind() {
            MapKind::Circle => None,
            MapKind::Interval => {
                let mut x = uniform_open(rng);
                for _ in 0..burn_in {
                    x = map.advance(x).0;
                }
                Some(x)
            }
        };
        Self {
            map,
            thin: thin.max(1),
            state,
        }
    }

    #[inline]
    pub fn draw<R: Rng>(&mut self, rng: &mut R) -> f64 {
        match self.state.as_mut() {
            None => uniform_open(rng),
            Some(x) => {
                for _ in 0..self.thin {
                    *x = self.map.advance(*x).0;
                }
                *x
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_covers_total() {
        assert_eq!(split(10, 3), vec![4, 3, 3]);
        assert_eq!(split(2, 100), vec![1, 1]);
        assert_eq!(split(0, 5), vec![0]);
        assert_eq!(split(1000, 100).iter().sum::<usize>(), 1000);
    }

    #[test]
    fn batches_do_not_depend_on_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    par_batches(7, 1000, 10, |rng, n, _| {
                        (0..n).fold(0u32, |acc, _| acc.wrapping_add(rng.random::<u32>()))
                    })
                })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn estimate_of_constant() {
        let e = Estimate::from_samples(&[2.0; 10]);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn uniform_open_never_zero() {
        let mut rng = rng_for(1, 0);
        for _ in 0..10_000 {
            let x = uniform_open(&mut rng);
            assert!(x > -1.0 && x < 1.0 && x != 0.0);
        }
    }
}
