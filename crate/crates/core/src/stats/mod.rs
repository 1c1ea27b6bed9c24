//! Monte Carlo estimators and reference laws.
//!
//! Circle-map estimators sample initial points from normalized Lebesgue
//! measure, which is invariant. Interval-map estimators run one burned-in
//! orbit per batch and draw thinned points from it.

pub mod correlation;
pub mod empirical;
pub mod extremes;
pub mod fit;
pub mod limit;
pub mod observable;
pub mod recurrence;
pub mod stable;

use serde::{Deserialize, Serialize};

use crate::error::{parameter, Result};
use crate::maps::{Map, MapSpec};
use crate::mc::{self, InvariantSampler};

pub use correlation::{estimate_correlation, Correlation};
pub use empirical::{ks_distance, ks_two_sample, normal_cdf, poisson_pmf, EmpiricalDist, Pmf};
pub use extremes::{extreme_maxima_distribution, EvlClass, EvlSample};
pub use fit::{linear_fit, loglog_fit, LineFit};
pub use limit::{birkhoff_normalized_sums, large_deviation_curve, LargeDeviationCurve, Normalization};
pub use observable::{Observable, ObservableKind, ObservableSpec};
pub use recurrence::{
    hitting_time_distribution, return_time_distribution, visit_count_distribution, Ball,
};
pub use stable::{neutral_point_stable_law, StableLaw};

/// How points are drawn from the invariant measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// Burn-in steps per batch (interval map only).
    pub burn_in: usize,
    /// Orbit steps between consecutive draws (interval map only).
    pub thin: usize,
    pub batches: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            burn_in: mc::DEFAULT_BURN_IN,
            thin: 1,
            batches: mc::DEFAULT_BATCHES,
        }
    }
}

impl Sampling {
    pub fn validate(&self) -> Result<()> {
        if self.batches == 0 || self.thin == 0 {
            return Err(parameter("batches and thin must be positive"));
        }
        Ok(())
    }

    pub(crate) fn sampler<R: rand::Rng>(&self, map: Map, rng: &mut R) -> InvariantSampler {
        InvariantSampler::new(map, rng, self.burn_in, self.thin)
    }
}

/// Pilot samples used to estimate a mean when it is not known exactly.
pub const PILOT_SAMPLES: usize = 1_000_000;

/// Mean of the raw observable under the invariant measure: exact on the
/// circle where available, otherwise a Monte Carlo estimate.
pub fn observable_mean(spec: &MapSpec, obs: &ObservableSpec, sampling: &Sampling, seed: u64) -> Result<f64> {
    obs.validate()?;
    let map = spec.build();
    if map.kind() == crate::maps::MapKind::Circle {
        if let Some(m) = obs.circle_mean() {
            return Ok(m);
        }
    }
    let raw = ObservableSpec {
        mean_subtracted: false,
        scale: 1.0,
        ..*obs
    };
    let bound = Observable::bind(&raw, &map, 0.0);
    // A distinct stream family keeps pilot draws independent of the main run.
    let sums = mc::par_batches(seed ^ 0x9E37_79B9_7F4A_7C15, PILOT_SAMPLES, sampling.batches, |rng, count, _| {
        let mut sampler = sampling.sampler(map, rng);
        (0..count).map(|_| bound.eval(sampler.draw(rng))).sum::<f64>()
    });
    Ok(sums.iter().sum::<f64>() / PILOT_SAMPLES as f64)
}

/// Binds an observable, resolving its mean when centring is requested.
pub fn bind_observable(spec: &MapSpec, obs: &ObservableSpec, sampling: &Sampling, seed: u64) -> Result<Observable> {
    obs.validate()?;
    let mean = if obs.mean_subtracted {
        observable_mean(spec, obs, sampling, seed)?
    } else {
        0.0
    };
    Ok(Observable::bind(obs, &spec.build(), mean))
}
