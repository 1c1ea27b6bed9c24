use serde::{Deserialize, Serialize};

use crate::error::{parameter, Result};
use crate::maps::{Map, MapKind};

/// Shape of an observable `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObservableKind {
    /// `d(x, center)^ν`, ν-Hölder.
    HolderPower { nu: f64, center: f64 },
    /// Indicator of `(lo, hi)` with `C¹` smoothstep ramps of total width
    /// `width` centred on each endpoint.
    IndicatorSmoothed { lo: f64, hi: f64, width: f64 },
    /// `g₁(d(x, ξ)) = -ln d(x, ξ)`.
    LogDist { xi: f64 },
    /// `g₂(d(x, ξ)) = d(x, ξ)^(-1/α)`.
    PowDist { xi: f64, alpha: f64 },
    /// `g₃(d(x, ξ)) = upper - d(x, ξ)^(1/α)`.
    CappedPowDist { xi: f64, alpha: f64, upper: f64 },
}

/// An observable plus the affine post-processing applied to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub kind: ObservableKind,
    pub mean_subtracted: bool,
    /// Multiplier applied after mean subtraction.
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl ObservableSpec {
    pub fn new(kind: ObservableKind) -> Self {
        Self {
            kind,
            mean_subtracted: false,
            scale: 1.0,
        }
    }

    pub fn centered(mut self) -> Self {
        self.mean_subtracted = true;
        self
    }

    pub fn scaled(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Smoothed indicator of `(lo, hi)` with ramp width `10⁻³·(hi - lo)`.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self::new(ObservableKind::IndicatorSmoothed {
            lo,
            hi,
            width: 1e-3 * (hi - lo),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            ObservableKind::HolderPower { nu, center } => nu > 0.0 && nu <= 1.0 && center.abs() <= 1.0,
            ObservableKind::IndicatorSmoothed { lo, hi, width } => {
                lo < hi && width > 0.0 && lo - width / 2.0 >= -1.0 && hi + width / 2.0 <= 1.0
            }
            ObservableKind::LogDist { xi } => xi.abs() <= 1.0,
            ObservableKind::PowDist { xi, alpha } => xi.abs() <= 1.0 && alpha > 0.0,
            ObservableKind::CappedPowDist { xi, alpha, upper } => {
                xi.abs() <= 1.0 && alpha > 0.0 && upper.is_finite()
            }
        };
        if !ok || !self.scale.is_finite() {
            return Err(parameter(format!("invalid observable {:?}", self.kind)));
        }
        Ok(())
    }

    /// Mean under normalized Lebesgue on the circle, where it is invariant.
    pub fn circle_mean(&self) -> Option<f64> {
        match self.kind {
            // Circle distances to any point are uniform on [0, 1].
            ObservableKind::HolderPower { nu, .. } => Some(1.0 / (nu + 1.0)),
            ObservableKind::IndicatorSmoothed { lo, hi, .. } => Some(0.5 * (hi - lo)),
            ObservableKind::LogDist { .. } => Some(1.0),
            ObservableKind::PowDist { alpha, .. } => (alpha > 1.0).then(|| alpha / (alpha - 1.0)),
            ObservableKind::CappedPowDist { alpha, upper, .. } => Some(upper - alpha / (alpha + 1.0)),
        }
    }
}

#[inline]
fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

/// An observable bound to a map's geometry and a fixed mean.
#[derive(Debug, Clone, Copy)]
pub struct Observable {
    kind: ObservableKind,
    circle: bool,
    shift: f64,
    scale: f64,
}

impl Observable {
    /// Binds `spec`; `mean` is the value subtracted when the spec asks for it.
    pub fn bind(spec: &ObservableSpec, map: &Map, mean: f64) -> Self {
        Self {
            kind: spec.kind,
            circle: map.kind() == MapKind::Circle,
            shift: if spec.mean_subtracted { mean } else { 0.0 },
            scale: spec.scale,
        }
    }

    #[inline]
    fn dist(&self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        if self.circle {
            d.min(2.0 - d)
        } else {
            d
        }
    }

    #[inline]
    pub fn raw(&self, x: f64) -> f64 {
        match self.kind {
            ObservableKind::HolderPower { nu, center } => {
                let d = self.dist(x, center);
                if nu == 1.0 {
                    d
                } else {
                    d.powf(nu)
                }
            }
            ObservableKind::IndicatorSmoothed { lo, hi, width } => {
                let h = 0.5 * width;
                smoothstep((x - (lo - h)) / width) * (1.0 - smoothstep((x - (hi - h)) / width))
            }
            ObservableKind::LogDist { xi } => -self.dist(x, xi).ln(),
            ObservableKind::PowDist { xi, alpha } => self.dist(x, xi).powf(-1.0 / alpha),
            ObservableKind::CappedPowDist { xi, alpha, upper } => upper - self.dist(x, xi).powf(1.0 / alpha),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.scale * (self.raw(x) - self.shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MapSpec;

    #[test]
    fn smoothed_indicator_has_exact_mass() {
        let spec = ObservableSpec::indicator(-0.4, 0.3);
        let map = MapSpec::circle(2.0).unwrap().build();
        let obs = Observable::bind(&spec, &map, 0.0);
        let n = 200_000;
        let h = 2.0 / n as f64;
        let integral: f64 = (0..n).map(|i| obs.eval(-1.0 + (i as f64 + 0.5) * h) * h).sum();
        assert!((0.5 * integral - spec.circle_mean().unwrap()).abs() < 1e-8);
        assert_eq!(obs.eval(0.0), 1.0);
        assert_eq!(obs.eval(0.9), 0.0);
    }

    #[test]
    fn circle_distance_wraps() {
        let spec = ObservableSpec::new(ObservableKind::HolderPower { nu: 1.0, center: 0.9 });
        let map = MapSpec::circle(2.0).unwrap().build();
        let obs = Observable::bind(&spec, &map, 0.0);
        assert!((obs.eval(-0.9) - 0.2).abs() < 1e-15);
        let map = MapSpec::hemmer().build();
        let obs = Observable::bind(&spec, &map, 0.0);
        assert!((obs.eval(-0.9) - 1.8).abs() < 1e-15);
    }

    #[test]
    fn centering_and_scale() {
        let spec = ObservableSpec::new(ObservableKind::HolderPower { nu: 1.0, center: 0.0 })
            .centered()
            .scaled(0.2);
        let map = MapSpec::circle(3.0).unwrap().build();
        let obs = Observable::bind(&spec, &map, spec.circle_mean().unwrap());
        assert!((obs.eval(1.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(ObservableSpec::indicator(0.5, 0.2).validate().is_err());
        assert!(ObservableSpec::new(ObservableKind::HolderPower { nu: 1.5, center: 0.0 })
            .validate()
            .is_err());
        assert!(ObservableSpec::new(ObservableKind::LogDist { xi: 0.3 }).validate().is_ok());
    }
}
