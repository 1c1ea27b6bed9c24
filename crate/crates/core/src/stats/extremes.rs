//! Block maxima of `g(d(Tʲx, ξ))` and the three extreme value types.

use serde::{Deserialize, Serialize};

use super::recurrence::{ball_measure, Ball};
use super::{ks_distance, EmpiricalDist, ObservableKind, ObservableSpec, Observable, Sampling};
use crate::error::{domain, parameter, Result};
use crate::maps::{MapKind, MapSpec};
use crate::mc;

/// Observable class `g₁`, `g₂` or `g₃`, with its limiting extreme value type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum EvlClass {
    /// `-ln d`, limit `exp(-e^{-y})`.
    Gumbel,
    /// `d^{-1/α}`, limit `exp(-y^{-α})` for `y > 0`.
    Frechet { alpha: f64 },
    /// `D - d^{1/α}`, limit `exp(-(-y)^α)` for `y ≤ 0`.
    Weibull { alpha: f64, upper: f64 },
}

impl EvlClass {
    fn validate(&self) -> Result<()> {
        match *self {
            EvlClass::Gumbel => Ok(()),
            EvlClass::Frechet { alpha } | EvlClass::Weibull { alpha, .. } if !(alpha > 0.0) => {
                Err(parameter("EVL exponent alpha must be positive"))
            }
            EvlClass::Weibull { upper, .. } if !upper.is_finite() => Err(parameter("Weibull upper bound must be finite")),
            _ => Ok(()),
        }
    }

    pub fn observable(&self, xi: f64) -> ObservableSpec {
        ObservableSpec::new(match *self {
            EvlClass::Gumbel => ObservableKind::LogDist { xi },
            EvlClass::Frechet { alpha } => ObservableKind::PowDist { xi, alpha },
            EvlClass::Weibull { alpha, upper } => ObservableKind::CappedPowDist { xi, alpha, upper },
        })
    }

    /// Limiting distribution function.
    pub fn cdf(&self, y: f64) -> f64 {
        match *self {
            EvlClass::Gumbel => (-(-y).exp()).exp(),
            EvlClass::Frechet { alpha } => {
                if y <= 0.0 {
                    0.0
                } else {
                    (-y.powf(-alpha)).exp()
                }
            }
            EvlClass::Weibull { alpha, .. } => {
                if y >= 0.0 {
                    1.0
                } else {
                    (-(-y).powf(alpha)).exp()
                }
            }
        }
    }

    /// `(a_n, b_n)` so that `a_n (M_n - b_n)` has the limit law, given
    /// `μ(B_r(ξ)) ≈ slope · r`.
    pub fn normalization(&self, n: usize, slope: f64) -> (f64, f64) {
        let cn = slope * n as f64;
        match *self {
            EvlClass::Gumbel => (1.0, cn.ln()),
            EvlClass::Frechet { alpha } => (cn.powf(-1.0 / alpha), 0.0),
            EvlClass::Weibull { alpha, upper } => (cn.powf(1.0 / alpha), upper),
        }
    }
}

/// Normalized block maxima with their reference law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvlSample {
    pub class: EvlClass,
    pub xi: f64,
    pub n: usize,
    pub a_n: f64,
    pub b_n: f64,
    /// Slope of `r ↦ μ(B_r(ξ))` at zero.
    pub slope: f64,
    pub dist: EmpiricalDist,
}

impl EvlSample {
    pub fn reference_cdf(&self, y: f64) -> f64 {
        self.class.cdf(y)
    }

    pub fn ks(&self) -> f64 {
        ks_distance(&self.dist, |y| self.class.cdf(y))
    }
}

/// Radius of the pilot ball used to measure the local slope on the interval.
pub const SLOPE_PILOT_RADIUS: f64 = 1e-3;

/// Slope of `r ↦ μ(B_r(ξ))`: one on the circle, a pilot estimate on the
/// interval.
pub fn ball_measure_slope(spec: &MapSpec, xi: f64, sampling: &Sampling, seed: u64) -> Result<f64> {
    match spec.kind() {
        MapKind::Circle => Ok(1.0),
        MapKind::Interval => {
            let ball = Ball::new(xi, SLOPE_PILOT_RADIUS)?;
            let mu = ball_measure(spec, &ball, sampling, seed);
            if mu == 0.0 {
                return Err(domain(format!("pilot orbit never visited the ball around {xi}")));
            }
            Ok(mu / SLOPE_PILOT_RADIUS)
        }
    }
}

pub fn extreme_maxima_distribution(
    spec: &MapSpec,
    xi: f64,
    class: EvlClass,
    n: usize,
    samples: usize,
    sampling: &Sampling,
    seed: u64,
) -> Result<EvlSample> {
    class.validate()?;
    if n == 0 || samples == 0 {
        return Err(parameter("block length and samples must be positive"));
    }
    let edge = match spec.kind() {
        MapKind::Circle => xi.abs() >= 1.0,
        MapKind::Interval => xi.abs() >= 1.0 || xi == 0.0,
    };
    if !xi.is_finite() || edge {
        return Err(domain(format!(
            "centre ξ = {xi} is not generic: it sits on the neutral point or the cusp"
        )));
    }
    sampling.validate()?;
    let map = spec.build();
    let obs = class.observable(xi);
    obs.validate()?;
    let g = Observable::bind(&obs, &map, 0.0);
    let slope = ball_measure_slope(spec, xi, sampling, seed)?;
    let (a_n, b_n) = class.normalization(n, slope);
    let maxima: Vec<f64> = mc::par_batches(seed, samples, sampling.batches, |rng, count, _| {
        let mut sampler = sampling.sampler(map, rng);
        (0..count)
            .map(|_| {
                let mut x = sampler.draw(rng);
                let mut m = f64::NEG_INFINITY;
                for _ in 0..n {
                    m = m.max(g.eval(x));
                    x = map.advance(x).0;
                }
                a_n * (m - b_n)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    Ok(EvlSample {
        class,
        xi,
        n,
        a_n,
        b_n,
        slope,
        dist: EmpiricalDist::new(maxima),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_laws() {
        assert!((EvlClass::Gumbel.cdf(0.0) - (-1f64).exp()).abs() < 1e-15);
        let f = EvlClass::Frechet { alpha: 1.0 };
        assert_eq!(f.cdf(-1.0), 0.0);
        assert!((f.cdf(1.0) - (-1f64).exp()).abs() < 1e-15);
        let w = EvlClass::Weibull { alpha: 1.0, upper: 2.0 };
        assert_eq!(w.cdf(0.5), 1.0);
        assert!((w.cdf(-1.0) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn weibull_maxima_are_nonpositive() {
        let spec = MapSpec::circle(2.0).unwrap();
        let class = EvlClass::Weibull { alpha: 1.0, upper: 1.0 };
        let s = extreme_maxima_distribution(&spec, 0.3183, class, 100, 200, &Sampling::default(), 3).unwrap();
        assert!(s.dist.samples().iter().all(|&y| y <= 0.0));
    }

    #[test]
    fn degenerate_centre_rejected() {
        let spec = MapSpec::circle(2.0).unwrap();
        assert!(extreme_maxima_distribution(&spec, 1.0, EvlClass::Gumbel, 10, 10, &Sampling::default(), 1).is_err());
        let hem = MapSpec::hemmer();
        assert!(extreme_maxima_distribution(&hem, 0.0, EvlClass::Gumbel, 10, 10, &Sampling::default(), 1).is_err());
    }
}
