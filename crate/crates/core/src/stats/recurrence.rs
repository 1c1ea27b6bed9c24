//! Return times, hitting times and visit counts for small balls.
//!
//! Times are rescaled by the ball's invariant measure `μ(B)`. On the circle
//! `μ(B_r) = r` exactly; on the interval it is the fraction of orbit time
//! spent in the ball.

use serde::{Deserialize, Serialize};

use super::{EmpiricalDist, Pmf, Sampling};
use crate::error::{domain, parameter, Result};
use crate::maps::{Map, MapKind, MapSpec};
use crate::mc;

/// The ball `B_r(center)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: f64,
    pub radius: f64,
}

impl Ball {
    /// Rejects balls that touch the cusp or the neutral point, where the
    /// asymptotics of generic centres do not apply.
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(parameter("ball radius must be positive"));
        }
        let c = center.abs();
        if !(c - radius > 0.0 && c + radius < 1.0) {
            return Err(domain(format!(
                "ball of radius {radius} around {center} reaches 0 or ±1; choose a generic centre"
            )));
        }
        Ok(Self { center, radius })
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() < self.radius
    }
}

/// Pilot orbit length for estimating `μ(B)` on the interval map.
pub const MEASURE_PILOT_STEPS: usize = 20_000_000;

/// `μ(B)`: exact on the circle, orbit frequency on the interval.
pub fn ball_measure(spec: &MapSpec, ball: &Ball, sampling: &Sampling, seed: u64) -> f64 {
    let map = spec.build();
    match map.kind() {
        MapKind::Circle => ball.radius,
        MapKind::Interval => {
            let visits: usize = mc::par_batches(seed ^ 0x5851_F42D_4C95_7F2D, MEASURE_PILOT_STEPS, sampling.batches, |rng, count, _| {
                let mut x = mc::uniform_open(rng);
                for _ in 0..sampling.burn_in {
                    x = map.advance(x).0;
                }
                let mut hits = 0;
                for _ in 0..count {
                    x = map.advance(x).0;
                    hits += usize::from(ball.contains(x));
                }
                hits
            })
            .into_iter()
            .sum();
            visits as f64 / MEASURE_PILOT_STEPS as f64
        }
    }
}

/// Rescaled return times with the measure used for rescaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceSample {
    pub dist: EmpiricalDist,
    pub measure: f64,
}

#[inline]
fn time_to_enter(map: &Map, ball: &Ball, mut x: f64) -> usize {
    let mut t = 0;
    loop {
        x = map.advance(x).0;
        t += 1;
        if ball.contains(x) {
            return t;
        }
    }
}

/// Law of `τ_B · μ(B)` for starts distributed by `μ` conditioned on `B`.
pub fn return_time_distribution(
    spec: &MapSpec,
    ball: &Ball,
    samples: usize,
    sampling: &Sampling,
    seed: u64,
) -> Result<RecurrenceSample> {
    if samples == 0 {
        return Err(parameter("samples >= 1 required"));
    }
    sampling.validate()?;
    let map = spec.build();
    match map.kind() {
        MapKind::Circle => {
            let times: Vec<f64> = mc::par_batches(seed, samples, sampling.batches, |rng, count, _| {
                (0..count)
                    .map(|_| {
                        let y = mc::uniform_in(rng, ball.center - ball.radius, ball.center + ball.radius);
                        time_to_enter(&map, ball, y) as f64
                    })
                    .collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect();
            let mu = ball.radius;
            Ok(RecurrenceSample {
                dist: EmpiricalDist::new(times.into_iter().map(|t| t * mu).collect()),
                measure: mu,
            })
        }
        MapKind::Interval => {
            // Successive visits of one long orbit sample the conditional
            // invariant measure on the ball.
            let runs = mc::par_batches(seed, samples, sampling.batches, |rng, count, _| {
                let mut x = mc::uniform_open(rng);
                for _ in 0..sampling.burn_in {
                    x = map.advance(x).0;
                }
                let mut steps = 0usize;
                let mut times = Vec::with_capacity(count);
                while !ball.contains(x) {
                    x = map.advance(x).0;
                }
                while times.len() < count {
                    let t = time_to_enter(&map, ball, x);
                    for _ in 0..t {
                        x = map.advance(x).0;
                    }
                    steps += t;
                    times.push(t as f64);
                }
                (times, steps)
            });
            let steps: usize = runs.iter().map(|r| r.1).sum();
            let mu = samples as f64 / steps as f64;
            let times = runs.into_iter().flat_map(|r| r.0).map(|t| t * mu).collect();
            Ok(RecurrenceSample {
                dist: EmpiricalDist::new(times),
                measure: mu,
            })
        }
    }
}

/// Law of `τ_B · μ(B)` for starts distributed by `μ` on the whole space.
pub fn hitting_time_distribution(
    spec: &MapSpec,
    ball: &Ball,
    samples: usize,
    sampling: &Sampling,
    seed: u64,
) -> Result<RecurrenceSample> {
    if samples == 0 {
        return Err(parameter("samples >= 1 required"));
    }
    sampling.validate()?;
    let map = spec.build();
    let mu = ball_measure(spec, ball, sampling, seed);
    let times: Vec<f64> = mc::par_batches(seed, samples, sampling.batches, |rng, count, _| {
        let mut sampler = sampling.sampler(map, rng);
        (0..count)
            .map(|_| time_to_enter(&map, ball, sampler.draw(rng)) as f64 * mu)
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    Ok(RecurrenceSample {
        dist: EmpiricalDist::new(times),
        measure: mu,
    })
}

/// Counts of visits to `B` at times `1..=⌊t/μ(B)⌋` for starts in `B`.
pub fn visit_count_distribution(
    spec: &MapSpec,
    ball: &Ball,
    t: f64,
    samples: usize,
    sampling: &Sampling,
    seed: u64,
) -> Result<Pmf> {
    if !(t >= 0.0) {
        return Err(parameter("rescaled time t must be nonnegative"));
    }
    if samples == 0 {
        return Err(parameter("samples >= 1 required"));
    }
    sampling.validate()?;
    let map = spec.build();
    let mu = ball_measure(spec, ball, sampling, seed);
    let window = (t / mu).floor() as usize;
    let count_visits = |mut y: f64| {
        let mut k = 0;
        for _ in 0..window {
            y = map.advance(y).0;
            k += usize::from(ball.contains(y));
        }
        k
    };
    let counts: Vec<usize> = mc::par_batches(seed, samples, sampling.batches, |rng, count, _| {
        match map.kind() {
            MapKind::Circle => (0..count)
                .map(|_| count_visits(mc::uniform_in(rng, ball.center - ball.radius, ball.center + ball.radius)))
                .collect::<Vec<_>>(),
            MapKind::Interval => {
                let mut sampler = sampling.sampler(map, rng);
                let mut out = Vec::with_capacity(count);
                while out.len() < count {
                    let x = sampler.draw(rng);
                    if ball.contains(x) {
                        out.push(count_visits(x));
                    }
                }
                out
            }
        }
    })
    .into_iter()
    .flatten()
    .collect();
    Ok(Pmf::from_counts(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_validation() {
        assert!(Ball::new(0.618, 1e-3).is_ok());
        assert!(Ball::new(0.618, 0.3).is_ok());
        assert!(Ball::new(0.999, 1e-2).is_err());
        assert!(Ball::new(0.001, 1e-2).is_err());
        assert!(Ball::new(-0.5, 0.0).is_err());
    }

    #[test]
    fn zero_time_gives_no_visits() {
        let spec = MapSpec::circle(2.0).unwrap();
        let ball = Ball::new(0.4, 0.01).unwrap();
        let pmf = visit_count_distribution(&spec, &ball, 0.0, 100, &Sampling::default(), 1).unwrap();
        assert_eq!(pmf.prob(0), 1.0);
    }

    #[test]
    fn hitting_cdf_starts_at_zero() {
        let spec = MapSpec::circle(2.0).unwrap();
        let ball = Ball::new(0.4, 0.01).unwrap();
        let h = hitting_time_distribution(&spec, &ball, 1000, &Sampling::default(), 2).unwrap();
        assert_eq!(h.dist.cdf(0.0), 0.0);
        assert!(h.dist.samples()[0] > 0.0);
    }
}
