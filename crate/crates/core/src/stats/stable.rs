//! Stable laws `X(p, c, β)` with characteristic function
//! `exp(-c|t|^p (1 - iβ sgn(t) tan(pπ/2)))`, and their CDF by Gil-Pelaez
//! inversion:
//!
//! ```text
//! F(x) = 1/2 - (1/π) ∫₀^∞ e^{-c t^p} sin(cβ tan(pπ/2) t^p - t x) / t dt
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};
use crate::quad;

/// Target absolute accuracy of [`StableLaw::cdf`].
pub const CDF_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    pub p: f64,
    pub c: f64,
    pub beta: f64,
}

impl StableLaw {
    pub fn new(p: f64, c: f64, beta: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 2.0) || p == 1.0 {
            return Err(parameter(format!("stable index p must lie in (0,1)∪(1,2] (got {p})")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(parameter(format!("stable scale c must be positive (got {c})")));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(parameter(format!("skewness beta must lie in [-1, 1] (got {beta})")));
        }
        Ok(Self { p, c, beta })
    }

    /// `N(0, 1)` in this parametrization.
    pub fn standard_normal() -> Self {
        Self { p: 2.0, c: 0.5, beta: 0.0 }
    }

    fn skew(&self) -> f64 {
        if self.p == 2.0 {
            0.0
        } else {
            self.c * self.beta * (0.5 * PI * self.p).tan()
        }
    }

    /// Characteristic scale `c^{1/p}`.
    pub fn scale(&self) -> f64 {
        self.c.powf(1.0 / self.p)
    }

    /// `(c₁, c₂)` with `P(X > t) ~ c₁ t^{-p}`, `P(X < -t) ~ c₂ t^{-p}`;
    /// `None` for the Gaussian case.
    pub fn tail_constants(&self) -> Option<(f64, f64)> {
        if self.p == 2.0 {
            return None;
        }
        let sum = self.c / (libm::tgamma(1.0 - self.p) * (0.5 * PI * self.p).cos());
        Some((0.5 * (1.0 + self.beta) * sum, 0.5 * (1.0 - self.beta) * sum))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        let k = self.skew();
        let (p, c) = (self.p, self.c);
        // Integrate in t for p > 1 and in u = t^p for p < 1, which keeps the
        // integrand bounded at the origin in both cases.
        let (upper, freq) = if p > 1.0 {
            let t_max = (45.0 / c).powf(1.0 / p);
            (t_max, x.abs() * t_max)
        } else {
            let u_max = 45.0 / c;
            (u_max, x.abs() * u_max.powf(1.0 / p))
        };
        let pieces = ((freq / PI).ceil() as usize + 8).min(20_000);
        let breaks: Vec<f64> = (0..=pieces).map(|i| upper * i as f64 / pieces as f64).collect();
        let q = if p > 1.0 {
            quad::gauss_kronrod(
                |t| {
                    if t == 0.0 {
                        return -x;
                    }
                    let tp = t.powf(p);
                    (-c * tp).exp() * (k * tp - t * x).sin() / t
                },
                &breaks,
                1e-10,
                0.0,
                200_000,
            )
        } else {
            quad::gauss_kronrod(
                |u| {
                    if u == 0.0 {
                        return k / p;
                    }
                    (-c * u).exp() * (k * u - u.powf(1.0 / p) * x).sin() / (p * u)
                },
                &breaks,
                1e-10,
                0.0,
                200_000,
            )
        }?;
        if q.error > CDF_TOL {
            return Err(Error::Quadrature {
                value: q.value,
                error_bound: q.error,
            });
        }
        Ok((0.5 - q.value / PI).clamp(0.0, 1.0))
    }

    /// Tabulates the CDF on `[lo, hi]` for fast repeated evaluation.
    pub fn cdf_table(&self, lo: f64, hi: f64, points: usize) -> Result<CdfTable> {
        if !(lo < hi) || points < 2 {
            return Err(parameter("cdf table needs lo < hi and at least two points"));
        }
        let s = self.scale();
        let (ua, ub) = ((lo / s).asinh(), (hi / s).asinh());
        let xs: Vec<f64> = (0..points)
            .map(|i| s * (ua + (ub - ua) * i as f64 / (points - 1) as f64).sinh())
            .collect();
        let fs = xs.iter().map(|&x| self.cdf(x)).collect::<Result<Vec<_>>>()?;
        Ok(CdfTable { xs, fs })
    }
}

/// Piecewise-linear CDF through tabulated points, constant outside.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

impl CdfTable {
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|&v| v <= x);
        if i == 0 {
            return self.fs[0];
        }
        if i == self.xs.len() {
            return self.fs[i - 1];
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let w = (x - x0) / (x1 - x0);
        self.fs[i - 1] + w * (self.fs[i] - self.fs[i - 1])
    }
}

/// The stable limit for `S_nφ / n^{(γ-1)/γ}` on the circle when `γ > 2`,
/// from the value `φ(1)` of the centred observable at the neutral point.
///
/// The sign of `φ(1)` only enters through `β`.
pub fn neutral_point_stable_law(gamma: f64, phi_at_one: f64) -> Result<StableLaw> {
    if !(gamma > 2.0) {
        return Err(parameter(format!("stable regime requires gamma > 2 (got {gamma})")));
    }
    if phi_at_one == 0.0 {
        return Err(parameter("phi(1) = 0 gives a Gaussian limit"));
    }
    let p = gamma / (gamma - 1.0);
    let tail_sum = (0.5 / gamma) * (2.0 * gamma * phi_at_one.abs() / (gamma - 1.0)).powf(p);
    let c = tail_sum * libm::tgamma(1.0 - p) * (0.5 * PI * p).cos();
    StableLaw::new(p, c, phi_at_one.signum())
}

/// The scale written directly as `(1/2γ)(2γφ(1)/(γ-1))^{γ/(γ-1)} Γ(1/(1-γ)) cos(πγ/(2(γ-1)))`.
/// Undefined (`None`) for `φ(1) < 0`, where the fractional power has no real value.
pub fn neutral_point_scale_literal(gamma: f64, phi_at_one: f64) -> Option<f64> {
    let base = 2.0 * gamma * phi_at_one / (gamma - 1.0);
    if base < 0.0 {
        return None;
    }
    Some(
        (0.5 / gamma)
            * base.powf(gamma / (gamma - 1.0))
            * libm::tgamma(1.0 / (1.0 - gamma))
            * (PI * gamma / (2.0 * (gamma - 1.0))).cos(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Maclaurin series of erf, independent of libm.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-17 {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn symmetric_law_is_centered() {
        let law = StableLaw::new(1.5, 1.0, 0.0).unwrap();
        assert!((law.cdf(0.0).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn gaussian_case_matches_error_function() {
        let law = StableLaw::standard_normal();
        assert!((law.cdf(1.0).unwrap() - 0.841_344_746).abs() < 1e-6);
        for i in 0..100 {
            let x = -4.0 + 8.0 * i as f64 / 99.0;
            let oracle = 0.5 * (1.0 + erf_series(x / 2f64.sqrt()));
            assert!((law.cdf(x).unwrap() - oracle).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn cauchy_free_case_p_half_symmetric() {
        // Lévy-type check: symmetric p = 1/2 CDF is odd about 0.
        let law = StableLaw::new(0.5, 1.0, 0.0).unwrap();
        let a = law.cdf(3.0).unwrap();
        let b = law.cdf(-3.0).unwrap();
        assert!((a + b - 1.0).abs() < 1e-6);
    }

    #[test]
    fn one_sided_levy_law_matches_closed_form() {
        // p = 1/2, β = 1 is the Lévy law: F(x) = erfc(sqrt(σ/(2x))) with
        // c = σ^{1/2}, i.e. σ = c².
        let c = 1.0;
        let law = StableLaw::new(0.5, c, 1.0).unwrap();
        for &x in &[0.5, 1.0, 4.0, 20.0] {
            let sigma: f64 = c * c;
            let expect = 1.0 - erf_series((sigma / (2.0 * x)).sqrt());
            assert!((law.cdf(x).unwrap() - expect).abs() < 2e-6, "x={x}");
        }
        assert!(law.cdf(-1.0).unwrap() < 1e-6);
    }

    #[test]
    fn right_tail_follows_power_law() {
        let law = StableLaw::new(1.5, 1.0, 1.0).unwrap();
        let (c1, c2) = law.tail_constants().unwrap();
        assert!(c2.abs() < 1e-15);
        let t = 60.0;
        let tail = 1.0 - law.cdf(t).unwrap();
        assert!((tail * t.powf(1.5) / c1 - 1.0).abs() < 0.05, "{tail} vs {c1}");
    }

    #[test]
    fn table_interpolates_cdf() {
        let law = StableLaw::new(1.5, 0.77, 1.0).unwrap();
        let table = law.cdf_table(-20.0, 200.0, 2001).unwrap();
        for &x in &[-3.0, -0.2, 0.0, 0.7, 5.0, 150.0] {
            assert!((table.eval(x) - law.cdf(x).unwrap()).abs() < 2e-5);
        }
        assert_eq!(table.eval(-1e9), table.eval(-20.0));
    }

    #[test]
    fn neutral_point_scale_forms_agree() {
        let law = neutral_point_stable_law(3.0, 0.5).unwrap();
        assert!((law.p - 1.5).abs() < 1e-15 && law.beta == 1.0);
        let lit = neutral_point_scale_literal(3.0, 0.5).unwrap();
        assert!((law.c - lit).abs() < 1e-12 * lit);
        // Γ(-1/2)·cos(3π/4) = √(2π)
        let expect = (1.0 / 6.0) * 1.5f64.powf(1.5) * (2.0 * PI).sqrt();
        assert!((law.c - expect).abs() < 1e-12);
        assert!(neutral_point_scale_literal(3.0, -0.5).is_none());
        assert_eq!(neutral_point_stable_law(3.0, -0.5).unwrap().beta, -1.0);
    }

    #[test]
    fn invalid_laws_rejected() {
        assert!(StableLaw::new(1.0, 1.0, 0.0).is_err());
        assert!(StableLaw::new(2.5, 1.0, 0.0).is_err());
        assert!(StableLaw::new(1.5, -1.0, 0.0).is_err());
        assert!(StableLaw::new(1.5, 1.0, 1.5).is_err());
    }
}
