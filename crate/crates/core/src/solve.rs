//! Root finding for the implicit branches.
//!
//! Both map families reduce, near their neutral fixed point, to the scalar
//! equation `u - c·u^γ = ε` on `[0, 1]` where `u` is the distance of the image
//! to the fixed point and `ε` the distance of the argument. With `c·γ < 1` the
//! left-hand side is strictly increasing and concave, so a bracketed Newton
//! iteration started below the root never leaves the bracket; bisection is
//! kept as a fallback for rounding pathologies.

/// A real exponent with a fast path for small integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Power {
    value: f64,
    int: Option<i32>,
}

impl Power {
    pub(crate) fn new(value: f64) -> Self {
        let int = if value.fract() == 0.0 && value.abs() <= 8.0 {
            Some(value as i32)
        } else {
            None
        };
        Self { value, int }
    }

    #[inline]
    pub(crate) fn apply(&self, x: f64) -> f64 {
        match self.int {
            Some(k) => x.powi(k),
            None => x.powf(self.value),
        }
    }
}

/// Exponent `1/γ`, with `sqrt`/`cbrt` fast paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Root {
    Sqrt,
    Cbrt,
    General(f64),
}

impl Root {
    pub(crate) fn of(gamma: f64) -> Self {
        if gamma == 2.0 {
            Root::Sqrt
        } else if gamma == 3.0 {
            Root::Cbrt
        } else {
            Root::General(1.0 / gamma)
        }
    }

    #[inline]
    pub(crate) fn apply(&self, x: f64) -> f64 {
        match *self {
            Root::Sqrt => x.sqrt(),
            Root::Cbrt => x.cbrt(),
            Root::General(e) => x.powf(e),
        }
    }
}

/// Outcome of one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Solved {
    pub u: f64,
    pub residual: f64,
    pub iterations: u32,
}

/// `u ↦ u - c·u^γ` with its derivative, the common neutral-branch profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NeutralProfile {
    pub c: f64,
    pub gamma: f64,
    pow_gm1: Power,
}

impl NeutralProfile {
    pub(crate) fn new(c: f64, gamma: f64) -> Self {
        debug_assert!(c * gamma < 1.0);
        Self {
            c,
            gamma,
            pow_gm1: Power::new(gamma - 1.0),
        }
    }

    /// `u - c·u^γ`
    #[inline]
    pub(crate) fn value(&self, u: f64) -> f64 {
        u - self.c * self.pow_gm1.apply(u) * u
    }

    /// `c·u^(γ-1)`, shared by value and slope.
    #[inline]
    pub(crate) fn c_pow_gm1(&self, u: f64) -> f64 {
        self.c * self.pow_gm1.apply(u)
    }

    /// Largest attainable right-hand side, reached at `u = 1`.
    pub(crate) fn max_eps(&self) -> f64 {
        1.0 - self.c
    }

    /// Solves `u - c·u^γ = eps` for `u ∈ [0, 1]`.
    ///
    /// `eps` is clamped into `[0, 1 - c]`. The returned residual is absolute.
    #[inline]
    pub(crate) fn solve(&self, eps: f64, max_iter: u32) -> Solved {
        let eps = eps.clamp(0.0, self.max_eps());
        if eps == 0.0 {
            return Solved {
                u: 0.0,
                residual: 0.0,
                iterations: 0,
            };
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        // One fixed-point step from u = eps: stays below the root by concavity.
        let mut u = (eps + self.c_pow_gm1(eps) * eps).min(1.0);
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            let cp = self.c_pow_gm1(u);
            let f = u - cp * u - eps;
            if f == 0.0 {
                return Solved {
                    u,
                    residual: 0.0,
                    iterations,
                };
            }
            if f < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let slope = 1.0 - self.gamma * cp;
            let step = f / slope;
            let mut next = u - step;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let moved = (next - u).abs();
            u = next;
            if moved <= 4.0 * f64::EPSILON * u || hi - lo <= f64::EPSILON * u {
                break;
            }
        }
        Solved {
            u,
            residual: (self.value(u) - eps).abs(),
            iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_profile_matches_closed_form() {
        // u - u²/4 = eps  =>  u = 2 - 2·sqrt(1 - eps)
        let prof = NeutralProfile::new(0.25, 2.0);
        for &eps in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.74, 0.75] {
            let s = prof.solve(eps, 60);
            let exact = 2.0 - 2.0 * (1.0 - eps).sqrt();
            assert!((s.u - exact).abs() <= 1e-15 * exact.max(1e-300) + 1e-16, "eps={eps}");
            assert!(s.residual <= 1e-15);
        }
    }

    #[test]
    fn tiny_eps_keeps_relative_precision() {
        let prof = NeutralProfile::new(1.0 / 3.0, 1.5);
        let eps = 1e-200;
        let s = prof.solve(eps, 60);
        assert!((s.u / eps - 1.0).abs() < 1e-14);
    }

    #[test]
    fn endpoints() {
        let prof = NeutralProfile::new(1.0 / 6.0, 3.0);
        assert_eq!(prof.solve(0.0, 50).u, 0.0);
        let top = prof.solve(prof.max_eps(), 50);
        assert!((top.u - 1.0).abs() < 1e-14);
    }

    #[test]
    fn power_fast_path_agrees() {
        for &e in &[1.0, 2.0, 0.5, 1.5, 3.0] {
            let p = Power::new(e);
            for &x in &[0.1, 0.7, 1.3] {
                assert!((p.apply(x) - x.powf(e)).abs() < 1e-15);
            }
        }
        for &g in &[2.0, 3.0, 1.7] {
            assert!((Root::of(g).apply(0.3) - 0.3f64.powf(1.0 / g)).abs() < 1e-15);
        }
    }
}
