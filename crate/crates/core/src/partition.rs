//! Countable Markov partitions, cylinders of the first-return maps, tail
//! measures and numerical distortion checks.
//!
//! Both families share the same structure. With `c = 1/(2γ)` (circle) or
//! `c = a` (interval) the gaps `g_n = 1 - a_n` to the neutral fixed point obey
//! `g_{n+1} = g_n - c·g_n^γ`, `g_0 = 1 - c`, and the preimages of the
//! `a`-points near the cusp are
//!
//! ```text
//! b_n = c·g_{n-1}^γ          (circle)
//! b_n = (g_{n-1}/b)^(1/κ)    (interval)
//! ```
//!
//! Lengths are plain Lebesgue lengths (the whole space has length 2).

use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, Error, Result};
use crate::maps::{Map, MapKind, MapParams, MapSpec};
use crate::mc;
use crate::quad;
use crate::solve::Power;

/// Default iteration cap for [`first_return`].
pub const DEFAULT_RETURN_CAP: usize = 10_000_000;

/// Endpoints `a_{±n}`, `b_{±n}` and lengths `l_n` up to depth `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable {
    spec: MapSpec,
    gap: Vec<f64>,
    a_plus: Vec<f64>,
    b_plus: Vec<f64>,
    l: Vec<f64>,
}

/// Constants of the recursion: `(c, γ)`.
fn recursion_constants(spec: &MapSpec) -> (f64, f64) {
    match spec.params {
        MapParams::Circle(p) => (p.knot(), p.gamma),
        MapParams::Interval(p) => (p.a, p.gamma),
    }
}

fn b_from_gap(spec: &MapSpec, g: f64) -> f64 {
    match spec.params {
        MapParams::Circle(p) => p.knot() * g.powf(p.gamma),
        MapParams::Interval(p) => (g / p.b).powf(1.0 / p.kappa),
    }
}

impl PartitionTable {
    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn depth(&self) -> usize {
        self.a_plus.len() - 1
    }

    /// `a_n` for `0 ≤ n ≤ N`, with `a_0 = a_{0+}`.
    pub fn a_plus(&self, n: usize) -> f64 {
        self.a_plus[n]
    }

    /// `a_{-n}`, with `a_{-0} = a_{0-}`.
    pub fn a_minus(&self, n: usize) -> f64 {
        -self.a_plus[n]
    }

    /// `1 - a_n`, kept separately because it is far more accurate than the
    /// subtraction once `a_n` is close to 1.
    pub fn gap(&self, n: usize) -> f64 {
        self.gap[n]
    }

    /// `b_n` for `1 ≤ n ≤ N`.
    pub fn b_plus(&self, n: usize) -> f64 {
        assert!(n >= 1, "b_n is defined for n >= 1");
        self.b_plus[n]
    }

    pub fn b_minus(&self, n: usize) -> f64 {
        -self.b_plus(n)
    }

    /// `l_n = a_n - a_{n-1}` for `1 ≤ n ≤ N`.
    pub fn l(&self, n: usize) -> f64 {
        assert!(n >= 1, "l_n is defined for n >= 1");
        self.l[n]
    }

    /// The reference set `I_m = (a_{-m}, a_m)`.
    pub fn reference_set(&self, m: usize) -> (f64, f64) {
        (self.a_minus(m), self.a_plus(m))
    }

    /// Writes `n,a_n,a_minus_n,b_n,b_minus_n,l_n`; `b` and `l` are blank at `n = 0`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,a_n,a_minus_n,b_n,b_minus_n,l_n")?;
        writeln!(w, "0,{},{},,,", self.a_plus(0), self.a_minus(0))?;
        for n in 1..=self.depth() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                n,
                self.a_plus(n),
                self.a_minus(n),
                self.b_plus(n),
                self.b_minus(n),
                self.l(n)
            )?;
        }
        Ok(())
    }

    /// Cylinders of the first-return map to `I_m` with return time `≤ p_max`.
    pub fn induced(&self, m: usize, p_max: usize) -> Result<InducedMap> {
        if p_max == 0 {
            return Err(parameter("p_max >= 1 required"));
        }
        self.check_depth(m + p_max)?;
        let mut cylinders = Vec::with_capacity(2 * p_max);
        for side in [Side::Plus, Side::Minus] {
            for p in 1..=p_max {
                cylinders.push(self.cylinder(m, p, side));
            }
        }
        Ok(InducedMap {
            spec: self.spec,
            m,
            p_max,
            cylinders,
            reference: self.reference_set(m),
            tail: self.tail_measure(m, p_max)?,
        })
    }

    /// `Z^±_{m,p}`; requires `m + p ≤ N`.
    pub fn cylinder(&self, m: usize, p: usize, side: Side) -> Cylinder {
        assert!(p >= 1);
        let (lo, hi) = if p == 1 {
            (self.b_plus(m + 1), self.a_plus(m))
        } else {
            (self.b_plus(m + p), self.b_plus(m + p - 1))
        };
        let (lo, hi) = match side {
            Side::Plus => (lo, hi),
            Side::Minus => (-hi, -lo),
        };
        Cylinder { m, p, side, lo, hi }
    }

    fn check_depth(&self, needed: usize) -> Result<()> {
        if needed > self.depth() {
            Err(Error::Depth {
                requested: needed,
                max_achievable: self.depth(),
            })
        } else {
            Ok(())
        }
    }

    /// Length of `{x ∈ I_m : τ_{I_m}(x) > n}`.
    pub fn tail_measure(&self, m: usize, n: usize) -> Result<f64> {
        self.check_depth(m + n)?;
        Ok(if n == 0 {
            2.0 * self.a_plus(m)
        } else {
            2.0 * self.b_plus(m + n)
        })
    }
}

/// Builds the partition to depth `N`.
pub fn build_partition(spec: &MapSpec, depth: usize) -> Result<PartitionTable> {
    if depth == 0 {
        return Err(parameter("partition depth N >= 1 required"));
    }
    let (c, gamma) = recursion_constants(spec);
    let pow = Power::new(gamma);
    let mut gap = Vec::with_capacity(depth + 1);
    let mut a_plus = Vec::with_capacity(depth + 1);
    let mut b_plus = Vec::with_capacity(depth + 1);
    let mut l = Vec::with_capacity(depth + 1);
    let mut g = 1.0 - c;
    gap.push(g);
    a_plus.push(c);
    // Index 0 of `b` holds a_0 so that Z_{0,p} = (b_p, b_{p-1}) for every p.
    b_plus.push(c);
    l.push(0.0);
    for n in 1..=depth {
        let step = c * pow.apply(g);
        let next = g - step;
        let a_next = 1.0 - next;
        if !(next > 0.0 && next < g && a_next > a_plus[n - 1]) {
            return Err(Error::Depth {
                requested: depth,
                max_achievable: n - 1,
            });
        }
        b_plus.push(b_from_gap(spec, g));
        l.push(step);
        g = next;
        gap.push(g);
        a_plus.push(a_next);
    }
    Ok(PartitionTable {
        spec: *spec,
        gap,
        a_plus,
        b_plus,
        l,
    })
}

/// Side of the cusp a cylinder lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub m: usize,
    pub p: usize,
    pub side: Side,
    pub lo: f64,
    pub hi: f64,
}

impl Cylinder {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

/// First-return map to `I_m`, truncated at return time `p_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedMap {
    pub spec: MapSpec,
    pub m: usize,
    pub p_max: usize,
    /// Plus-side cylinders for `p = 1..=p_max`, then the Minus side.
    pub cylinders: Vec<Cylinder>,
    pub reference: (f64, f64),
    /// Length of the uncovered set `(b_{-(m+p_max)}, b_{m+p_max})`.
    pub tail: f64,
}

impl InducedMap {
    pub fn cylinder(&self, p: usize, side: Side) -> &Cylinder {
        let offset = match side {
            Side::Plus => 0,
            Side::Minus => self.p_max,
        };
        &self.cylinders[offset + p - 1]
    }

    /// Cylinder containing `x`, if it lies in a covered one.
    pub fn locate(&self, x: f64) -> Option<&Cylinder> {
        let (side, ax) = if x > 0.0 { (Side::Plus, x) } else { (Side::Minus, -x) };
        let plus = &self.cylinders[..self.p_max];
        // Plus-side cylinders are ordered right to left as p grows.
        let idx = plus.partition_point(|c| c.lo >= ax);
        let c = plus.get(idx)?;
        if c.contains(ax) {
            Some(self.cylinder(c.p, side))
        } else {
            None
        }
    }

    /// `(p, T^p x)` for `x` in a covered cylinder.
    pub fn apply(&self, x: f64) -> Option<(usize, f64)> {
        let p = self.locate(x)?.p;
        let map = self.spec.build();
        let mut y = x;
        for _ in 0..p {
            y = map.advance(y).0;
        }
        Some((p, y))
    }
}

/// First return time of `x ∈ I_m` to `I_m` and the re-entry point.
pub fn first_return(spec: &MapSpec, m: usize, x: f64) -> Result<(usize, f64)> {
    first_return_capped(spec, m, x, DEFAULT_RETURN_CAP)
}

pub fn first_return_capped(spec: &MapSpec, m: usize, x: f64, cap: usize) -> Result<(usize, f64)> {
    let table = build_partition(spec, m.max(1))?;
    let (lo, hi) = table.reference_set(m);
    if !(x > lo && x < hi) || x == 0.0 {
        return Err(domain(format!("{x} is not a point of I_{m} \\ {{0}}")));
    }
    let map = spec.build();
    let mut y = x;
    let mut partial = Vec::new();
    for p in 1..=cap {
        y = map.advance(y).0;
        if y > lo && y < hi {
            return Ok((p, y));
        }
        if partial.len() < 64 {
            partial.push(y);
        }
    }
    Err(Error::CapExceeded {
        m,
        cap,
        last: y,
        partial,
    })
}

/// Fitted partition constants at `n = N` and the closed-form predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub n: usize,
    /// `n^{1/(γ-1)}(1 - a_n)`
    pub gap_scaled: f64,
    pub gap_constant: f64,
    /// `n^{γ/(γ-1)} l_n`
    pub length_scaled: f64,
    pub length_constant: f64,
    /// `n^{e_b} b_n` with `e_b = γ/(γ-1)` (circle) or `1/(κ(γ-1))` (interval)
    pub b_exponent: f64,
    pub b_scaled: f64,
    pub b_constant: f64,
}

impl ScalingReport {
    pub fn gap_deviation(&self) -> f64 {
        (self.gap_scaled / self.gap_constant - 1.0).abs()
    }
    pub fn length_deviation(&self) -> f64 {
        (self.length_scaled / self.length_constant - 1.0).abs()
    }
    pub fn b_deviation(&self) -> f64 {
        (self.b_scaled / self.b_constant - 1.0).abs()
    }
}

/// Asymptotic constants and exponents of the partition sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics {
    pub gap_constant: f64,
    pub gap_exponent: f64,
    pub length_constant: f64,
    pub length_exponent: f64,
    pub b_constant: f64,
    pub b_exponent: f64,
}

pub fn asymptotics(spec: &MapSpec) -> Asymptotics {
    let (c, gamma) = recursion_constants(spec);
    let base = 1.0 / (c * (gamma - 1.0));
    let gap_constant = base.powf(1.0 / (gamma - 1.0));
    let length_constant = c * base.powf(gamma / (gamma - 1.0));
    let (b_constant, b_exponent) = match spec.params {
        MapParams::Circle(_) => (length_constant, gamma / (gamma - 1.0)),
        MapParams::Interval(p) => {
            let e = 1.0 / (p.kappa * (gamma - 1.0));
            ((1.0 / (p.a * p.b.powf(gamma - 1.0) * (gamma - 1.0))).powf(e), e)
        }
    };
    Asymptotics {
        gap_constant,
        gap_exponent: 1.0 / (gamma - 1.0),
        length_constant,
        length_exponent: gamma / (gamma - 1.0),
        b_constant,
        b_exponent,
    }
}

pub fn scaling_constants(table: &PartitionTable) -> Result<ScalingReport> {
    let n = table.depth();
    if n < 1000 {
        return Err(parameter(format!("scaling fit needs N >= 1000 (got {n})")));
    }
    let asy = asymptotics(table.spec());
    let nf = n as f64;
    Ok(ScalingReport {
        n,
        gap_scaled: nf.powf(asy.gap_exponent) * table.gap(n),
        gap_constant: asy.gap_constant,
        length_scaled: nf.powf(asy.length_exponent) * table.l(n),
        length_constant: asy.length_constant,
        b_exponent: asy.b_exponent,
        b_scaled: nf.powf(asy.b_exponent) * table.b_plus(n),
        b_constant: asy.b_constant,
    })
}

/// Predicted leading correlation term `Σ_{k>n} m(τ_{I_m} > k)`, in
/// probability units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalTerm {
    pub value: f64,
    /// Whether the power-law tail beyond the table depth was added.
    pub extrapolated: bool,
}

pub fn renewal_leading_term(table: &PartitionTable, m: usize, n: usize) -> Result<RenewalTerm> {
    let depth = table.depth();
    if m + n >= depth {
        return Err(Error::Depth {
            requested: m + n + 1,
            max_achievable: depth,
        });
    }
    let asy = asymptotics(table.spec());
    let e = asy.b_exponent;
    if e <= 1.0 {
        return Err(parameter(
            "tail measures are not summable for these parameters",
        ));
    }
    // Tail lengths 2·b_{m+k}, k > n, summed from the smallest term upwards.
    let mut sum: f64 = (m + n + 1..=depth).rev().map(|j| 2.0 * table.b_plus(j)).sum();
    // Beyond the table: b_j ≈ B·j^{-e} with B fitted at j = N, and
    // Σ_{j>N} j^{-e} ≈ (N + 1/2)^{1-e}/(e - 1).
    let bf = table.b_plus(depth) * (depth as f64).powf(e);
    let remainder = 2.0 * bf * (depth as f64 + 0.5).powf(1.0 - e) / (e - 1.0);
    sum += remainder;
    Ok(RenewalTerm {
        value: 0.5 * sum,
        extrapolated: true,
    })
}

/// `Σ_p p·length(Z_{0,p})`, summed as `Σ_{n≥0} m(τ > n)` with the
/// extrapolated tail beyond the table.
pub fn kac_sum(table: &PartitionTable) -> Result<f64> {
    Ok(table.tail_measure(0, 0)? + 2.0 * renewal_leading_term(table, 0, 0)?.value)
}

/// Result of [`distortion_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionScan {
    /// Largest quotient `|log DT^p x - log DT^p y| / |T^p x - T^p y|` per `p`.
    pub per_p: Vec<f64>,
    /// Running supremum of `per_p`; `k_by_p[p-1]` is K_hat after `p`.
    pub k_by_p: Vec<f64>,
    pub k_hat: f64,
    /// Largest `DT^p(x)/DT^p(y)` over all pairs.
    pub worst_ratio: f64,
    /// Pairs whose ratio exceeds `exp(k_hat·|T^p x - T^p y|)`.
    pub violations: usize,
    pub pairs: usize,
    pub skipped: usize,
    /// Sampled points whose return time differed from their cylinder's `p`.
    pub markov_mismatches: usize,
}

impl DistortionScan {
    pub fn k_at(&self, p: usize) -> f64 {
        self.k_by_p[p - 1]
    }
}

struct PairSample {
    log_ratio: f64,
    image_gap: f64,
}

/// Point in a cylinder biased towards its endpoints.
fn biased_point<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    let u: f64 = rng.random();
    let v: f64 = rng.random::<f64>().powi(6);
    let x = match (u * 3.0) as u32 {
        0 => lo + w * v,
        1 => hi - w * v,
        _ => lo + w * rng.random::<f64>(),
    };
    x.clamp(lo, hi)
}

/// `(Σ log|DT(T^k x)|, T^p x)` and whether the first return to `I_m` is at `p`.
fn induced_log_deriv(map: &Map, x: f64, p: usize, reference: (f64, f64)) -> (f64, f64, bool) {
    let mut y = x;
    let mut acc = 0.0;
    let mut early = false;
    for k in 0..p {
        acc += map.log_abs_deriv(y);
        y = map.advance(y).0;
        if k + 1 < p && y > reference.0 && y < reference.1 {
            early = true;
        }
    }
    let returned = y > reference.0 && y < reference.1;
    (acc, y, returned && !early)
}

/// Empirical distortion constant of the first-return map on `Z_{m,p}`,
/// `p ≤ p_max`.
pub fn distortion_scan(
    spec: &MapSpec,
    m: usize,
    p_max: usize,
    pairs_per_cylinder: usize,
    seed: u64,
) -> Result<DistortionScan> {
    if p_max == 0 || pairs_per_cylinder == 0 {
        return Err(parameter("p_max and pairs_per_cylinder must be positive"));
    }
    let table = build_partition(spec, m + p_max)?;
    let induced = table.induced(m, p_max)?;
    let map = spec.build();
    let reference = induced.reference;

    let per_cylinder: Vec<(Vec<PairSample>, usize, usize)> = (1..=p_max)
        .into_par_iter()
        .map(|p| {
            let mut rng = mc::rng_for(seed, p as u64);
            let plus = induced.cylinder(p, Side::Plus);
            let minus = induced.cylinder(p, Side::Minus);
            let mut samples = Vec::with_capacity(pairs_per_cylinder);
            let mut skipped = 0;
            let mut mismatches = 0;
            for i in 0..pairs_per_cylinder {
                let x = biased_point(&mut rng, plus.lo, plus.hi);
                // Every third pair crosses the cusp.
                let y = if i % 3 == 2 {
                    biased_point(&mut rng, minus.lo, minus.hi)
                } else {
                    biased_point(&mut rng, plus.lo, plus.hi)
                };
                if !(plus.contains(x) && (plus.contains(y) || minus.contains(y))) {
                    skipped += 1;
                    continue;
                }
                let (lx, tx, okx) = induced_log_deriv(&map, x, p, reference);
                let (ly, ty, oky) = induced_log_deriv(&map, y, p, reference);
                if !(okx && oky) {
                    mismatches += 1;
                    continue;
                }
                let image_gap = (tx - ty).abs();
                if image_gap < 1e-12 {
                    skipped += 1;
                    continue;
                }
                samples.push(PairSample {
                    log_ratio: (lx - ly).abs(),
                    image_gap,
                });
            }
            (samples, skipped, mismatches)
        })
        .collect();

    let mut per_p = Vec::with_capacity(p_max);
    let mut k_by_p = Vec::with_capacity(p_max);
    let mut running: f64 = 0.0;
    let mut worst_log_ratio: f64 = 0.0;
    let (mut skipped, mut mismatches, mut pairs) = (0, 0, 0);
    for (samples, s, mm) in &per_cylinder {
        let k = samples
            .iter()
            .map(|s| s.log_ratio / s.image_gap)
            .fold(0.0, f64::max);
        worst_log_ratio = samples.iter().map(|s| s.log_ratio).fold(worst_log_ratio, f64::max);
        running = running.max(k);
        per_p.push(k);
        k_by_p.push(running);
        skipped += s;
        mismatches += mm;
        pairs += samples.len();
    }
    let k_hat = running;
    let violations = per_cylinder
        .iter()
        .flat_map(|(s, _, _)| s.iter())
        .filter(|s| s.log_ratio > k_hat * s.image_gap)
        .count();
    Ok(DistortionScan {
        per_p,
        k_by_p,
        k_hat,
        worst_ratio: worst_log_ratio.exp(),
        violations,
        pairs,
        skipped,
        markov_mismatches: mismatches,
    })
}

/// `(DT^p(x), d/dx log DT^p(x))` along the orbit of `x`, signs dropped.
pub fn induced_derivs(map: &Map, x: f64, p: usize) -> (f64, f64) {
    let mut y = x;
    let mut d = 1.0;
    let mut dlog = 0.0;
    for _ in 0..p {
        let (d1, d2) = map.derivs(y);
        dlog += d2 / d1 * d;
        d *= d1;
        y = map.advance(y).0;
    }
    (d.abs(), dlog * d.signum())
}

/// Result of [`variation_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationCheck {
    /// Summand for `p = 1..=p_max`, both sides of the cusp.
    pub increments: Vec<f64>,
    pub partial_sum: f64,
    pub last_increment: f64,
}

/// Absolute quadrature tolerance per cylinder.
const VARIATION_TOL: f64 = 1e-10;

/// Truncated sum over cylinders of `∫|D²T̂|/|DT̂|² + 2 sup 1/|DT̂|`.
pub fn variation_check(spec: &MapSpec, m: usize, p_max: usize) -> Result<VariationCheck> {
    let table = build_partition(spec, m + p_max)?;
    let induced = table.induced(m, p_max)?;
    let map = spec.build();
    let increments: Vec<f64> = (1..=p_max)
        .into_par_iter()
        .map(|p| {
            let cyl = induced.cylinder(p, Side::Plus);
            let integrand = |x: f64| {
                let (d, dlog) = induced_derivs(&map, x, p);
                dlog.abs() / d
            };
            let integral = quad::simpson(integrand, cyl.lo, cyl.hi, VARIATION_TOL, 50)?.value;
            let sup_inv = (0..=64)
                .map(|i| {
                    let x = cyl.lo + cyl.length() * i as f64 / 64.0;
                    let x = x.clamp(cyl.lo + 1e-3 * cyl.length(), cyl.hi - 1e-3 * cyl.length());
                    1.0 / induced_derivs(&map, x, p).0
                })
                .fold(0.0, f64::max);
            // The Minus side contributes the same by symmetry.
            Ok(2.0 * (integral + 2.0 * sup_inv))
        })
        .collect::<Result<_>>()?;
    let partial_sum = increments.iter().sum();
    let last_increment = *increments.last().expect("p_max >= 1");
    Ok(VariationCheck {
        increments,
        partial_sum,
        last_increment,
    })
}

/// Whether the map kind has Lebesgue as its invariant measure.
pub fn lebesgue_invariant(spec: &MapSpec) -> bool {
    spec.kind() == MapKind::Circle
}
