//! The two map families and their exact evaluation.
//!
//! The circle map `T` lives on `[-1, 1]` with `±1` identified. For `x ≥ 0` it
//! is defined implicitly by
//!
//! ```text
//! x = (1 + T)^γ / (2γ)             for 0 ≤ x ≤ 1/(2γ)
//! x = T + (1 - T)^γ / (2γ)         for 1/(2γ) ≤ x ≤ 1
//! ```
//!
//! and extended by `T(-x) = -T(x)`. The interval map `S` is even, with left
//! branch `S₁ = h⁻¹` where
//!
//! ```text
//! h(y) = y - a(1 + y)^γ            for y ∈ [-1, 0]
//! h(y) = -((1 - y)/b)^(1/κ)        for y ∈ [0, 1]
//! ```
//!
//! and `a = κ/(κγ + 1)`, `b = a^(-κ)` chosen for `C¹` matching at `y = 0`.
//! At `(κ, γ) = (1/2, 2)` this is exactly `S(x) = 1 - 2√|x|`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, Error, Result};
use crate::mc::{self, Estimate};
use crate::solve::{NeutralProfile, Power, Root};

/// Default residual tolerance of the implicit solves.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-14;
/// Default Newton iteration budget before the bracket is trusted.
pub const DEFAULT_MAX_NEWTON_ITERS: u32 = 60;

/// Parameters of the circle map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleParams {
    pub gamma: f64,
}

impl CircleParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(parameter(format!("gamma must be > 1 (got {gamma})")));
        }
        Ok(Self { gamma })
    }

    /// Left endpoint of the first branch, `1/(2γ)`; also `a_{0+}`.
    pub fn knot(&self) -> f64 {
        0.5 / self.gamma
    }
}

/// Parameters of the interval map. `a`, `b` are derived, never free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalParams {
    pub kappa: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub y0: f64,
}

impl IntervalParams {
    pub fn new(kappa: f64, gamma: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0 && kappa < 1.0) {
            return Err(parameter(format!("kappa must lie in (0, 1) (got {kappa})")));
        }
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(parameter(format!("gamma must be > 1 (got {gamma})")));
        }
        let a = kappa / (kappa * gamma + 1.0);
        let b = a.powf(-kappa);
        Ok(Self {
            kappa,
            gamma,
            a,
            b,
            y0: 0.0,
        })
    }

    /// The map `1 - 2√|x|`.
    pub fn hemmer() -> Self {
        Self::new(0.5, 2.0).expect("valid parameters")
    }

    /// Whether an absolutely continuous invariant probability is guaranteed,
    /// `κ(γ - 1) < 1`.
    pub fn has_acip(&self) -> bool {
        self.kappa * (self.gamma - 1.0) < 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Circle,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapParams {
    Circle(CircleParams),
    Interval(IntervalParams),
}

/// One map instance plus solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub params: MapParams,
    pub solver_tol: f64,
    pub max_newton_iters: u32,
}

impl MapSpec {
    pub fn circle(gamma: f64) -> Result<Self> {
        Ok(Self::from_params(MapParams::Circle(CircleParams::new(gamma)?)))
    }

    pub fn interval(kappa: f64, gamma: f64) -> Result<Self> {
        Ok(Self::from_params(MapParams::Interval(IntervalParams::new(
            kappa, gamma,
        )?)))
    }

    pub fn hemmer() -> Self {
        Self::from_params(MapParams::Interval(IntervalParams::hemmer()))
    }

    pub fn from_params(params: MapParams) -> Self {
        Self {
            params,
            solver_tol: DEFAULT_SOLVER_TOL,
            max_newton_iters: DEFAULT_MAX_NEWTON_ITERS,
        }
    }

    pub fn with_solver(mut self, tol: f64, max_iters: u32) -> Result<Self> {
        if !(1e-15..=1e-10).contains(&tol) {
            return Err(parameter(format!(
                "solver_tol must lie in [1e-15, 1e-10] (got {tol:e})"
            )));
        }
        if max_iters == 0 {
            return Err(parameter("max_newton_iters must be positive"));
        }
        self.solver_tol = tol;
        self.max_newton_iters = max_iters;
        Ok(self)
    }

    pub fn kind(&self) -> MapKind {
        match self.params {
            MapParams::Circle(_) => MapKind::Circle,
            MapParams::Interval(_) => MapKind::Interval,
        }
    }

    pub fn gamma(&self) -> f64 {
        match self.params {
            MapParams::Circle(p) => p.gamma,
            MapParams::Interval(p) => p.gamma,
        }
    }

    /// Short label used in reports, e.g. `circle(gamma=2)`.
    pub fn label(&self) -> String {
        match self.params {
            MapParams::Circle(p) => format!("circle(gamma={})", p.gamma),
            MapParams::Interval(p) => format!("interval(kappa={},gamma={})", p.kappa, p.gamma),
        }
    }

    pub fn build(&self) -> Map {
        Map::new(*self)
    }
}

/// Monotone branch selector for inverse branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Branch defined on `[-1, 0]`.
    Left,
    /// Branch defined on `[0, 1]`.
    Right,
}

/// A finite orbit segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub start: f64,
    pub length: usize,
    /// `x_0, …, x_n` when storage was requested.
    pub points: Option<Vec<f64>>,
    pub final_point: f64,
    /// Number of iterates that landed exactly on the cusp and were nudged.
    pub zero_hits: usize,
}

#[derive(Debug, Clone, Copy)]
struct CircleMap {
    gamma: f64,
    knot: f64,
    two_gamma: f64,
    root: Root,
    profile: NeutralProfile,
    pow_gm2: Power,
}

impl CircleMap {
    fn new(p: CircleParams) -> Self {
        let c = p.knot();
        Self {
            gamma: p.gamma,
            knot: c,
            two_gamma: 2.0 * p.gamma,
            root: Root::of(p.gamma),
            profile: NeutralProfile::new(c, p.gamma),
            pow_gm2: Power::new(p.gamma - 2.0),
        }
    }

    /// `T` on `(0, 1]`, returning the value and the solve residual.
    #[inline]
    fn right(&self, w: f64, iters: u32) -> (f64, f64) {
        if w <= self.knot {
            (self.root.apply(self.two_gamma * w) - 1.0, 0.0)
        } else {
            let s = self.profile.solve(1.0 - w, iters);
            (1.0 - s.u, s.residual)
        }
    }

    /// `(DT, D²T)` on `(0, 1]`.
    fn right_derivs(&self, w: f64, iters: u32) -> (f64, f64) {
        if w <= self.knot {
            let q = self.root.apply(self.two_gamma * w);
            let d1 = q / (self.gamma * w);
            let d2 = (1.0 - self.gamma) * d1 / (self.gamma * w);
            (d1, d2)
        } else {
            let v = self.profile.solve(1.0 - w, iters).u;
            let cp = self.profile.c_pow_gm1(v);
            let d1 = 1.0 / (1.0 - self.gamma * cp);
            let d2 =
                -(self.gamma - 1.0) * self.gamma * self.knot * self.pow_gm2.apply(v) * d1 * d1 * d1;
            (d1, d2)
        }
    }

    #[inline]
    fn log_deriv_right(&self, w: f64, iters: u32) -> f64 {
        if w <= self.knot {
            let q = self.root.apply(self.two_gamma * w);
            (q / (self.gamma * w)).ln()
        } else {
            let v = self.profile.solve(1.0 - w, iters).u;
            -(1.0 - self.gamma * self.profile.c_pow_gm1(v)).ln()
        }
    }

    fn inverse_right(&self, y: f64) -> f64 {
        let g = Power::new(self.gamma);
        if y <= 0.0 {
            self.knot * g.apply(1.0 + y)
        } else {
            y + self.knot * g.apply(1.0 - y)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct IntervalMap {
    kappa: f64,
    gamma: f64,
    a: f64,
    b: f64,
    pow_kappa: Power,
    pow_km1: Power,
    pow_km2: Power,
    pow_gm2: Power,
    profile: NeutralProfile,
}

impl IntervalMap {
    fn new(p: IntervalParams) -> Self {
        Self {
            kappa: p.kappa,
            gamma: p.gamma,
            a: p.a,
            b: p.b,
            pow_kappa: Power::new(p.kappa),
            pow_km1: Power::new(p.kappa - 1.0),
            pow_km2: Power::new(p.kappa - 2.0),
            pow_gm2: Power::new(p.gamma - 2.0),
            profile: NeutralProfile::new(p.a, p.gamma),
        }
    }

    /// `S(-w)` for `w ∈ [0, 1]`, returning value and residual.
    #[inline]
    fn left(&self, w: f64, iters: u32) -> (f64, f64) {
        if w <= self.a {
            (1.0 - self.b * self.pow_kappa.apply(w), 0.0)
        } else {
            let s = self.profile.solve(1.0 - w, iters);
            (s.u - 1.0, s.residual)
        }
    }

    /// `(DS, D²S)` at `-w`, the increasing branch.
    fn left_derivs(&self, w: f64, iters: u32) -> (f64, f64) {
        if w <= self.a {
            let d1 = self.kappa * self.b * self.pow_km1.apply(w);
            let d2 = self.kappa * (1.0 - self.kappa) * self.b * self.pow_km2.apply(w);
            (d1, d2)
        } else {
            let u = self.profile.solve(1.0 - w, iters).u;
            let hp = 1.0 - self.gamma * self.profile.c_pow_gm1(u);
            let d1 = 1.0 / hp;
            let d2 = self.a * self.gamma * (self.gamma - 1.0) * self.pow_gm2.apply(u) * d1 * d1 * d1;
            (d1, d2)
        }
    }

    #[inline]
    fn log_deriv_left(&self, w: f64, iters: u32) -> f64 {
        if w <= self.a {
            (self.kappa * self.b * self.pow_km1.apply(w)).ln()
        } else {
            let u = self.profile.solve(1.0 - w, iters).u;
            -(1.0 - self.gamma * self.profile.c_pow_gm1(u)).ln()
        }
    }

    /// `h(y)`, the inverse of the left branch.
    fn h(&self, y: f64) -> f64 {
        if y <= 0.0 {
            y - self.a * Power::new(self.gamma).apply(1.0 + y)
        } else {
            -((1.0 - y) / self.b).powf(1.0 / self.kappa)
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    Circle(CircleMap),
    Interval(IntervalMap),
}

/// A ready-to-evaluate map. Cheap to copy; evaluation is pure.
#[derive(Debug, Clone, Copy)]
pub struct Map {
    spec: MapSpec,
    kernel: Kernel,
}

fn check_unit(x: f64) -> Result<()> {
    if x.is_nan() || x.abs() > 1.0 {
        Err(domain(format!("argument {x} outside [-1, 1]")))
    } else {
        Ok(())
    }
}

impl Map {
    pub fn new(spec: MapSpec) -> Self {
        let kernel = match spec.params {
            MapParams::Circle(p) => Kernel::Circle(CircleMap::new(p)),
            MapParams::Interval(p) => Kernel::Interval(IntervalMap::new(p)),
        };
        Self { spec, kernel }
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn kind(&self) -> MapKind {
        self.spec.kind()
    }

    /// Unchecked evaluation for hot loops. `x` must lie in `[-1, 1]`.
    ///
    /// On the circle, `+0.0` maps to `-1` and `-0.0` to `+1` (one-sided limits).
    #[inline]
    pub fn step(&self, x: f64) -> f64 {
        let iters = self.spec.max_newton_iters;
        match &self.kernel {
            Kernel::Circle(c) => {
                if x > 0.0 {
                    c.right(x, iters).0
                } else if x < 0.0 {
                    -c.right(-x, iters).0
                } else if x.is_sign_positive() {
                    -1.0
                } else {
                    1.0
                }
            }
            Kernel::Interval(s) => s.left(x.abs(), iters).0,
        }
    }

    /// One step with the exact-zero nudge applied. Returns the new point and
    /// whether a nudge happened.
    #[inline]
    pub fn advance(&self, x: f64) -> (f64, bool) {
        let y = self.step(x);
        if y == 0.0 {
            (nudge_off_zero(x), true)
        } else {
            (y, false)
        }
    }

    /// Checked evaluation: domain and solver-residual checks.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        let iters = self.spec.max_newton_iters;
        let (value, residual) = match &self.kernel {
            Kernel::Circle(c) => {
                if x > 0.0 {
                    c.right(x, iters)
                } else if x < 0.0 {
                    let (v, r) = c.right(-x, iters);
                    (-v, r)
                } else {
                    (self.step(x), 0.0)
                }
            }
            Kernel::Interval(s) => s.left(x.abs(), iters),
        };
        if residual > self.spec.solver_tol {
            return Err(Error::Convergence {
                residual,
                iterations: iters,
            });
        }
        Ok(value)
    }

    /// First (`order = 1`) or second (`order = 2`) derivative.
    pub fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        check_unit(x)?;
        if x == 0.0 {
            return Err(domain("derivative diverges at the cusp x = 0"));
        }
        if order != 1 && order != 2 {
            return Err(parameter(format!("derivative order must be 1 or 2 (got {order})")));
        }
        let (d1, d2) = self.derivs(x);
        Ok(if order == 1 { d1 } else { d2 })
    }

    /// `(DF(x), D²F(x))` without domain checks; `x ≠ 0`.
    #[inline]
    pub fn derivs(&self, x: f64) -> (f64, f64) {
        let iters = self.spec.max_newton_iters;
        match &self.kernel {
            Kernel::Circle(c) => {
                let (d1, d2) = c.right_derivs(x.abs(), iters);
                if x > 0.0 {
                    (d1, d2)
                } else {
                    (d1, -d2)
                }
            }
            Kernel::Interval(s) => {
                let (d1, d2) = s.left_derivs(x.abs(), iters);
                if x < 0.0 {
                    (d1, d2)
                } else {
                    (-d1, d2)
                }
            }
        }
    }

    /// `ln |DF(x)|`, for Birkhoff sums of the expansion rate.
    #[inline]
    pub fn log_abs_deriv(&self, x: f64) -> f64 {
        let iters = self.spec.max_newton_iters;
        match &self.kernel {
            Kernel::Circle(c) => c.log_deriv_right(x.abs(), iters),
            Kernel::Interval(s) => s.log_deriv_left(x.abs(), iters),
        }
    }

    /// Preimage of `y` on the given monotone branch.
    pub fn invert(&self, branch: Branch, y: f64) -> Result<f64> {
        if y.is_nan() || y.abs() > 1.0 {
            return Err(domain(format!("{y} is outside the branch image [-1, 1]")));
        }
        Ok(match (&self.kernel, branch) {
            (Kernel::Circle(c), Branch::Right) => c.inverse_right(y),
            (Kernel::Circle(c), Branch::Left) => -c.inverse_right(-y),
            (Kernel::Interval(s), Branch::Left) => s.h(y),
            (Kernel::Interval(s), Branch::Right) => -s.h(y),
        })
    }

    /// Distance on the phase space: arc distance on the circle, `|x - y|` on
    /// the interval.
    #[inline]
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        match self.kind() {
            MapKind::Circle => d.min(2.0 - d),
            MapKind::Interval => d,
        }
    }

    /// Iterates `n` times from `x0`, nudging exact hits of the cusp.
    pub fn iterate(&self, x0: f64, n: usize, store: bool) -> Result<Orbit> {
        if x0.is_nan() || x0.abs() >= 1.0 {
            return Err(domain(format!("orbit start {x0} outside (-1, 1)")));
        }
        let mut points = store.then(|| {
            let mut v = Vec::with_capacity(n + 1);
            v.push(x0);
            v
        });
        let mut x = x0;
        let mut zero_hits = 0;
        for _ in 0..n {
            let (y, nudged) = self.advance(x);
            zero_hits += usize::from(nudged);
            x = y;
            if let Some(p) = points.as_mut() {
                p.push(x);
            }
        }
        Ok(Orbit {
            start: x0,
            length: n,
            points,
            final_point: x,
            zero_hits,
        })
    }
}

/// Replaces an exact zero by one ulp on the side of the previous iterate.
#[inline]
fn nudge_off_zero(prev: f64) -> f64 {
    let m = prev.abs();
    let ulp = if m > 0.0 { m.next_up() - m } else { f64::MIN_POSITIVE };
    ulp.copysign(prev)
}

pub fn eval_circle(params: CircleParams, x: f64) -> Result<f64> {
    Map::new(MapSpec::from_params(MapParams::Circle(params))).eval(x)
}

pub fn deriv_circle(params: CircleParams, x: f64, order: u8) -> Result<f64> {
    Map::new(MapSpec::from_params(MapParams::Circle(params))).deriv(x, order)
}

pub fn eval_interval(params: IntervalParams, x: f64) -> Result<f64> {
    Map::new(MapSpec::from_params(MapParams::Interval(params))).eval(x)
}

pub fn deriv_interval(params: IntervalParams, x: f64, order: u8) -> Result<f64> {
    Map::new(MapSpec::from_params(MapParams::Interval(params))).deriv(x, order)
}

pub fn invert_branch(spec: &MapSpec, branch: Branch, y: f64) -> Result<f64> {
    spec.build().invert(branch, y)
}

pub fn iterate_orbit(spec: &MapSpec, x0: f64, n: usize, store: bool) -> Result<Orbit> {
    spec.build().iterate(x0, n, store)
}

/// Steps discarded before averaging when the reference measure is not
/// Lebesgue (interval map).
pub const LYAPUNOV_BURN_IN: usize = 1_000;

/// Mean of per-orbit Birkhoff averages of `ln|DF|` with its standard error.
pub fn lyapunov_estimate(spec: &MapSpec, samples: usize, n: usize, seed: u64) -> Result<Estimate> {
    if samples == 0 {
        return Err(parameter("samples >= 1 required"));
    }
    if n == 0 {
        return Err(parameter("n >= 1 required"));
    }
    let map = spec.build();
    let burn_in = match map.kind() {
        MapKind::Circle => 0,
        MapKind::Interval => LYAPUNOV_BURN_IN,
    };
    let per_orbit: Vec<f64> = mc::par_batches(seed, samples, mc::DEFAULT_BATCHES, |rng, count, _| {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut x = mc::uniform_open(rng);
            for _ in 0..burn_in {
                x = map.advance(x).0;
            }
            let mut acc = 0.0;
            for _ in 0..n {
                acc += map.log_abs_deriv(x);
                x = map.advance(x).0;
            }
            out.push(acc / n as f64);
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();
    Ok(Estimate::from_samples(&per_orbit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(g: f64) -> Map {
        MapSpec::circle(g).unwrap().build()
    }

    #[test]
    fn circle_examples() {
        let p2 = CircleParams::new(2.0).unwrap();
        assert!(eval_circle(p2, 0.25).unwrap().abs() < 1e-15);
        assert_eq!(eval_circle(p2, 1.0).unwrap(), 1.0);
        assert!((eval_circle(p2, 0.5625).unwrap() - 0.5).abs() < 1e-14);
        let p3 = CircleParams::new(3.0).unwrap();
        assert!(eval_circle(p3, 1.0 / 6.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn circle_rejects_gamma_one_and_bad_domain() {
        assert!(CircleParams::new(1.0).is_err());
        assert!(CircleParams::new(0.5).is_err());
        let p = CircleParams::new(2.0).unwrap();
        assert!(matches!(eval_circle(p, 1.5), Err(Error::Domain(_))));
        assert!(matches!(deriv_circle(p, 0.0, 1), Err(Error::Domain(_))));
        assert!(deriv_circle(p, 0.3, 3).is_err());
    }

    #[test]
    fn circle_one_sided_limits_at_cusp() {
        let t = circle(2.5);
        assert_eq!(t.step(0.0), -1.0);
        assert_eq!(t.step(-0.0), 1.0);
    }

    #[test]
    fn circle_derivative_examples() {
        let p = CircleParams::new(2.0).unwrap();
        assert!((deriv_circle(p, 0.25, 1).unwrap() - 2.0).abs() < 1e-13);
        assert!((deriv_circle(p, 1.0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((deriv_circle(p, 0.25, 2).unwrap() + 4.0).abs() < 1e-12);
        // Closed form 1/√x and -x^{-3/2}/2 on both pieces.
        for &x in &[0.01, 0.1, 0.2, 0.3, 0.7, 0.99] {
            let d1 = deriv_circle(p, x, 1).unwrap();
            let d2 = deriv_circle(p, x, 2).unwrap();
            assert!((d1 - 1.0 / x.sqrt()).abs() < 1e-12 * d1, "x={x}");
            assert!((d2 + 0.5 * x.powf(-1.5)).abs() < 1e-11 * d2.abs(), "x={x}");
        }
    }

    #[test]
    fn circle_derivative_symmetry() {
        let t = circle(1.7);
        for &x in &[0.05, 0.2, 0.6, 0.95] {
            let (a1, a2) = t.derivs(x);
            let (b1, b2) = t.derivs(-x);
            assert_eq!(a1, b1);
            assert_eq!(a2, -b2);
        }
    }

    #[test]
    fn interval_examples() {
        let h = IntervalParams::hemmer();
        assert!((h.a - 0.25).abs() < 1e-16 && (h.b - 2.0).abs() < 1e-15);
        assert!(eval_interval(h, 0.25).unwrap().abs() < 1e-15);
        assert_eq!(eval_interval(h, -1.0).unwrap(), -1.0);
        assert_eq!(eval_interval(h, 1.0).unwrap(), -1.0);
        assert_eq!(eval_interval(h, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn interval_derivative_examples() {
        let h = IntervalParams::hemmer();
        assert!((deriv_interval(h, 0.25, 1).unwrap() + 2.0).abs() < 1e-13);
        assert!((deriv_interval(h, -0.25, 1).unwrap() - 2.0).abs() < 1e-13);
        assert!((deriv_interval(h, -1.0, 1).unwrap() - 1.0).abs() < 1e-15);
        for &x in &[-0.9, -0.5, -0.1, 0.01, 0.4, 0.8] {
            let d1 = deriv_interval(h, x, 1).unwrap();
            let expect = -x.signum() * x.abs().powf(-0.5);
            assert!((d1 - expect).abs() < 1e-12 * expect.abs(), "x={x}");
            let d2 = deriv_interval(h, x, 2).unwrap();
            let expect2 = 0.5 * x.abs().powf(-1.5);
            assert!((d2 - expect2).abs() < 1e-11 * expect2, "x={x}");
        }
    }

    #[test]
    fn interval_parameter_validation() {
        assert!(IntervalParams::new(1.0, 2.0).is_err());
        assert!(IntervalParams::new(0.0, 2.0).is_err());
        assert!(IntervalParams::new(0.5, 1.0).is_err());
        let p = IntervalParams::new(0.3, 2.5).unwrap();
        assert!(p.a > 0.0 && p.a < 1.0 && p.b > 1.0);
    }

    #[test]
    fn interval_branches_are_c1_at_knot() {
        let s = MapSpec::interval(0.7, 1.8).unwrap().build();
        let a = match s.spec().params {
            MapParams::Interval(p) => p.a,
            _ => unreachable!(),
        };
        let below = s.deriv(-a * (1.0 - 1e-9), 1).unwrap();
        let above = s.deriv(-a * (1.0 + 1e-9), 1).unwrap();
        assert!((below - above).abs() < 1e-6 * below);
    }

    #[test]
    fn inverse_branch_examples() {
        let c = MapSpec::circle(2.0).unwrap();
        assert!((invert_branch(&c, Branch::Right, 0.0).unwrap() - 0.25).abs() < 1e-16);
        assert!((invert_branch(&c, Branch::Left, 0.0).unwrap() + 0.25).abs() < 1e-16);
        let h = MapSpec::hemmer();
        assert!((invert_branch(&h, Branch::Left, -0.25).unwrap() + 25.0 / 64.0).abs() < 1e-16);
        assert!(invert_branch(&h, Branch::Left, 1.2).is_err());
    }

    #[test]
    fn solver_settings_validated() {
        let s = MapSpec::circle(2.0).unwrap();
        assert!(s.with_solver(1e-9, 10).is_err());
        assert!(s.with_solver(1e-16, 10).is_err());
        assert!(s.with_solver(1e-12, 0).is_err());
        assert!(s.with_solver(1e-12, 5).is_ok());
    }

    #[test]
    fn orbit_examples() {
        let spec = MapSpec::circle(2.0).unwrap();
        let o = iterate_orbit(&spec, 0.5625, 1, false).unwrap();
        assert!((o.final_point - 0.5).abs() < 1e-14);
        let o = iterate_orbit(&MapSpec::hemmer(), 0.3, 0, true).unwrap();
        assert_eq!(o.final_point, 0.3);
        assert_eq!(o.points.unwrap(), vec![0.3]);
        // 0.12 -> 2√0.12 - 1 -> 1 - 2√|.|
        let o = iterate_orbit(&spec, 0.12, 2, true).unwrap();
        let x1 = 2.0 * 0.12f64.sqrt() - 1.0;
        let x2 = 1.0 - 2.0 * x1.abs().sqrt();
        assert!((o.final_point - x2).abs() < 1e-14);
        assert!((o.final_point + 0.108476).abs() < 1e-6);
        assert!(iterate_orbit(&spec, 1.0, 3, false).is_err());
    }

    #[test]
    fn exact_zero_is_nudged_and_counted() {
        let spec = MapSpec::hemmer();
        // S(0.25) = 0 exactly.
        let o = iterate_orbit(&spec, 0.25, 3, true).unwrap();
        assert_eq!(o.zero_hits, 1);
        let pts = o.points.unwrap();
        assert!(pts[1] > 0.0 && pts[1] < 1e-15);
        assert!(pts.iter().all(|p| *p != 0.0));
    }

    #[test]
    fn lyapunov_requires_positive_lengths() {
        let spec = MapSpec::circle(2.0).unwrap();
        assert!(lyapunov_estimate(&spec, 1, 0, 1).is_err());
        assert!(lyapunov_estimate(&spec, 0, 5, 1).is_err());
    }

    #[test]
    fn lyapunov_small_run_is_near_half() {
        let est = lyapunov_estimate(&MapSpec::circle(2.0).unwrap(), 400, 2_000, 11).unwrap();
        assert!((est.mean - 0.5).abs() < 0.03, "{est:?}");
        assert!(est.stderr > 0.0);
    }
}
