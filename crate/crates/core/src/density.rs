//! Invariant density of the interval map: an occupation histogram from long
//! orbits, and Ulam's finite-rank approximation of the transfer operator.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, Error, Result};
use crate::maps::{Branch, MapParams, MapSpec};
use crate::mc;
use crate::partition::PartitionTable;
use crate::stats::{loglog_fit, LineFit, Sampling};

/// Cell boundaries for a density estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Binning {
    Uniform { bins: usize },
    /// Uniform cells refined by every partition point `a_{±n}`, `b_{±n}`
    /// with `n ≤ depth`, so cylinder masses are sums of whole cells.
    Graded { bins: usize, depth: usize },
    Edges { edges: Vec<f64> },
}

impl Binning {
    pub fn edges(&self, table: Option<&PartitionTable>) -> Result<Vec<f64>> {
        let edges = match self {
            Binning::Uniform { bins } => uniform_edges(*bins)?,
            Binning::Graded { bins, depth } => {
                let table = table.ok_or_else(|| parameter("graded binning needs a partition table"))?;
                if *depth > table.depth() {
                    return Err(Error::Depth {
                        requested: *depth,
                        max_achievable: table.depth(),
                    });
                }
                let mut e = uniform_edges(*bins)?;
                e.push(table.a_plus(0));
                e.push(table.a_minus(0));
                for n in 1..=*depth {
                    e.extend([table.a_plus(n), table.a_minus(n), table.b_plus(n), table.b_minus(n)]);
                }
                e.sort_by(f64::total_cmp);
                e.dedup();
                e
            }
            Binning::Edges { edges } => edges.clone(),
        };
        let ok = edges.len() >= 2
            && edges[0] == -1.0
            && *edges.last().expect("nonempty") == 1.0
            && edges.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(parameter("bin edges must increase strictly from -1 to 1"));
        }
        Ok(edges)
    }
}

fn uniform_edges(bins: usize) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(parameter("bins >= 1 required"));
    }
    let mut e: Vec<f64> = (0..=bins).map(|i| -1.0 + 2.0 * i as f64 / bins as f64).collect();
    e[bins] = 1.0;
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityMethod {
    Histogram,
    Ulam,
}

/// Piecewise-constant probability density on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub method: DensityMethod,
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
    /// Raw occupation counts (histogram only).
    pub counts: Option<Vec<u64>>,
    /// `‖vP - v‖₁` of the stationary vector (Ulam only).
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
}

impl DensityEstimate {
    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn density(&self, i: usize) -> f64 {
        self.masses[i] / self.width(i)
    }

    /// Index of the cell containing `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.edges[0] && x <= self.edges[self.bins()]) {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= x).clamp(1, self.bins()) - 1)
    }

    pub fn density_at(&self, x: f64) -> Option<f64> {
        self.locate(x).map(|i| self.density(i))
    }

    fn integrate_cells<F: Fn(usize) -> f64>(&self, lo: f64, hi: f64, per_cell: F) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        let start = self.edges.partition_point(|&e| e <= lo).saturating_sub(1);
        let mut total = 0.0;
        for i in start..self.bins() {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            if a >= hi {
                break;
            }
            let overlap = b.min(hi) - a.max(lo);
            if overlap > 0.0 {
                total += per_cell(i) * overlap / (b - a);
            }
        }
        total
    }

    /// `μ̂((lo, hi))`, splitting cells proportionally to overlap.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.integrate_cells(lo, hi, |i| self.masses[i])
    }

    /// Occupation count in `(lo, hi)`, split the same way.
    pub fn count_between(&self, lo: f64, hi: f64) -> Option<f64> {
        let counts = self.counts.as_ref()?;
        Some(self.integrate_cells(lo, hi, |i| counts[i] as f64))
    }

    /// `∫|ρ̂ - ρ|` for a reference density `ρ`, by 8-point Gauss–Legendre
    /// on each cell.
    pub fn l1_to<F: Fn(f64) -> f64>(&self, rho: F) -> f64 {
        const NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
        const WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
        (0..self.bins())
            .map(|i| {
                let (a, b) = (self.edges[i], self.edges[i + 1]);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                let d = self.density(i);
                let s: f64 = NODES
                    .iter()
                    .zip(WEIGHTS)
                    .map(|(&t, w)| w * ((d - rho(mid - half * t)).abs() + (d - rho(mid + half * t)).abs()))
                    .sum();
                half * s
            })
            .sum()
    }

    /// `∫|ρ̂₁ - ρ̂₂|` over the common refinement of both grids.
    pub fn l1_between(&self, other: &DensityEstimate) -> f64 {
        let mut cuts: Vec<f64> = self.edges.iter().chain(&other.edges).copied().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let (mut i, mut j) = (0, 0);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            while self.edges[i + 1] < mid {
                i += 1;
            }
            while other.edges[j + 1] < mid {
                j += 1;
            }
            total += (self.density(i) - other.density(j)).abs() * (w[1] - w[0]);
        }
        total
    }

    /// Writes `bin_lo,bin_hi,mass,density`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "bin_lo,bin_hi,mass,density")?;
        for i in 0..self.bins() {
            writeln!(w, "{},{},{},{}", self.edges[i], self.edges[i + 1], self.masses[i], self.density(i))?;
        }
        Ok(())
    }
}

fn require_interval_acip(spec: &MapSpec) -> Result<()> {
    match spec.params {
        MapParams::Circle(_) => Err(parameter(
            "density estimation requires the interval map (the circle map preserves Lebesgue measure)",
        )),
        MapParams::Interval(p) if !p.has_acip() => Err(parameter(format!(
            "kappa*(gamma-1) = {} must be < 1 for an absolutely continuous invariant probability",
            p.kappa * (p.gamma - 1.0)
        ))),
        MapParams::Interval(_) => Ok(()),
    }
}

/// Normalized occupation histogram of `steps` orbit points, split into
/// `sampling.batches` independently burned-in segments.
pub fn histogram_density(
    spec: &MapSpec,
    binning: &Binning,
    table: Option<&PartitionTable>,
    steps: usize,
    sampling: &Sampling,
    seed: u64,
) -> Result<DensityEstimate> {
    require_interval_acip(spec)?;
    sampling.validate()?;
    if steps == 0 {
        return Err(parameter("steps >= 1 required"));
    }
    let edges = binning.edges(table)?;
    let bins = edges.len() - 1;
    let map = spec.build();
    let per_batch = mc::par_batches(seed, steps, sampling.batches, |rng, count, _| {
        let mut sampler = sampling.sampler(map, rng);
        let mut counts = vec![0u64; bins];
        for _ in 0..count {
            let x = sampler.draw(rng);
            let i = edges.partition_point(|&e| e <= x).clamp(1, bins) - 1;
            counts[i] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; bins];
    for c in &per_batch {
        for (t, v) in counts.iter_mut().zip(c) {
            *t += v;
        }
    }
    let total: u64 = counts.iter().sum();
    Ok(DensityEstimate {
        method: DensityMethod::Histogram,
        masses: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        edges,
        counts: Some(counts),
        residual: None,
        iterations: None,
    })
}

/// Row-stochastic Ulam matrix in compressed rows: entry `(i, j)` is the
/// fraction of cell `i` mapped into cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct UlamOperator {
    edges: Vec<f64>,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    probs: Vec<f64>,
}

pub const MIN_ULAM_CELLS: usize = 100;

impl UlamOperator {
    /// Assembles the matrix from exact preimages: both branches are
    /// monotone, so the preimage of a cell is one interval per branch.
    pub fn new(spec: &MapSpec, edges: Vec<f64>) -> Result<Self> {
        require_interval_acip(spec)?;
        let cells = edges.len() - 1;
        if cells < MIN_ULAM_CELLS {
            return Err(parameter(format!("Ulam needs at least {MIN_ULAM_CELLS} cells (got {cells})")));
        }
        let map = spec.build();
        let pre = |branch, y| map.invert(branch, y).expect("edges lie in [-1, 1]");
        let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cells];
        for j in 0..cells {
            let (y0, y1) = (edges[j], edges[j + 1]);
            let left = (pre(Branch::Left, y0), pre(Branch::Left, y1));
            let right = (pre(Branch::Right, y1), pre(Branch::Right, y0));
            for (lo, hi) in [left, right] {
                let start = edges.partition_point(|&e| e <= lo).saturating_sub(1);
                for i in start..cells {
                    if edges[i] >= hi {
                        break;
                    }
                    let overlap = edges[i + 1].min(hi) - edges[i].max(lo);
                    if overlap > 0.0 {
                        entries[i].push((j, overlap));
                    }
                }
            }
        }
        let mut row_start = vec![0];
        let (mut cols, mut probs) = (Vec::new(), Vec::new());
        for (i, row) in entries.iter().enumerate() {
            let sum: f64 = row.iter().map(|e| e.1).sum();
            if !(sum > 0.0) {
                return Err(domain(format!("cell {i} has no image")));
            }
            for &(j, w) in row {
                cols.push(j);
                probs.push(w / sum);
            }
            row_start.push(cols.len());
        }
        Ok(Self {
            edges,
            row_start,
            cols,
            probs,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    /// `vP`, the pushforward of cell masses.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cells()];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for k in self.row_start[i]..self.row_start[i + 1] {
                out[self.cols[k]] += vi * self.probs[k];
            }
        }
        out
    }

    /// Stationary vector by power iteration from Lebesgue measure.
    pub fn stationary(&self, tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64, usize)> {
        let mut v: Vec<f64> = self.edges.windows(2).map(|w| 0.5 * (w[1] - w[0])).collect();
        let mut residual = f64::INFINITY;
        for it in 1..=max_iter {
            let mut next = self.apply(&v);
            let s: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= s);
            residual = l1_diff(&next, &v);
            v = next;
            if residual <= tol {
                return Ok((v, residual, it));
            }
        }
        Err(Error::UlamConvergence {
            residual,
            iterations: max_iter,
        })
    }
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub const ULAM_TOL: f64 = 1e-12;
pub const ULAM_MAX_ITER: usize = 5_000_000;

pub fn ulam_density(spec: &MapSpec, binning: &Binning, table: Option<&PartitionTable>) -> Result<DensityEstimate> {
    let op = UlamOperator::new(spec, binning.edges(table)?)?;
    let (masses, residual, iterations) = op.stationary(ULAM_TOL, ULAM_MAX_ITER)?;
    Ok(DensityEstimate {
        method: DensityMethod::Ulam,
        edges: op.edges,
        masses,
        counts: None,
        residual: Some(residual),
        iterations: Some(iterations),
    })
}

/// `‖P̂μ̂ - μ̂‖₁` with `P̂` the Ulam operator on the estimate's own grid.
pub fn invariance_defect(spec: &MapSpec, density: &DensityEstimate) -> Result<f64> {
    let op = UlamOperator::new(spec, density.edges.clone())?;
    Ok(l1_diff(&op.apply(&density.masses), &density.masses))
}

/// Behaviour of `ρ` as `x → -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointTrend {
    Bounded,
    Diverges,
    Vanishes,
}

impl EndpointTrend {
    /// From an exponent `e` with `ρ ≈ n^e` along cylinders accumulating at
    /// the endpoint.
    pub fn classify(exponent: f64, tol: f64) -> Self {
        if exponent > tol {
            EndpointTrend::Diverges
        } else if exponent < -tol {
            EndpointTrend::Vanishes
        } else {
            EndpointTrend::Bounded
        }
    }

    pub fn predicted(kappa: f64, gamma: f64) -> Self {
        let d = kappa * gamma - 1.0;
        if d.abs() < 1e-12 {
            EndpointTrend::Bounded
        } else if d > 0.0 {
            EndpointTrend::Diverges
        } else {
            EndpointTrend::Vanishes
        }
    }
}

/// Fitted and predicted log–log slopes of cylinder mass and mean density
/// against the cylinder index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub mass: LineFit,
    pub mass_predicted: f64,
    pub density: LineFit,
    pub density_predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderExponents {
    /// Cylinders `(a_{n-1}, a_n)` accumulating at `+1`.
    pub plus_one: ExponentFit,
    /// Cylinders `(a_{-n}, a_{-n+1})` accumulating at `-1`.
    pub minus_one: ExponentFit,
    /// Cylinders `(b_{n+1}, b_n)` accumulating at `0`.
    pub zero: ExponentFit,
    pub trend_minus_one: EndpointTrend,
    pub trend_predicted: EndpointTrend,
}

/// Exponent tolerance separating the three endpoint behaviours.
pub const TREND_TOL: f64 = 0.15;

/// Minimum histogram count in a cylinder used for a fit.
pub const MIN_CYLINDER_COUNT: f64 = 10.0;

pub fn cylinder_measure_exponents(
    spec: &MapSpec,
    density: &DensityEstimate,
    table: &PartitionTable,
    n_range: (usize, usize),
) -> Result<CylinderExponents> {
    let p = match spec.params {
        MapParams::Interval(p) => p,
        MapParams::Circle(_) => return Err(parameter("cylinder exponents are defined for the interval map")),
    };
    let (n_lo, n_hi) = n_range;
    if n_lo < 2 || n_hi <= n_lo {
        return Err(parameter("n_range must satisfy 2 <= lo < hi"));
    }
    if n_hi + 1 > table.depth() {
        return Err(Error::Depth {
            requested: n_hi + 1,
            max_achievable: table.depth(),
        });
    }
    let k = p.kappa * (p.gamma - 1.0);
    let width_exp = -p.gamma / (p.gamma - 1.0);
    let fit = |label: &str, interval: &dyn Fn(usize) -> (f64, f64), mass_pred: f64, dens_pred: f64| {
        let ns: Vec<f64> = (n_lo..=n_hi).map(|n| n as f64).collect();
        let mut mass = Vec::with_capacity(ns.len());
        let mut dens = Vec::with_capacity(ns.len());
        for n in n_lo..=n_hi {
            let (lo, hi) = interval(n);
            if let Some(c) = density.count_between(lo, hi) {
                if c < MIN_CYLINDER_COUNT {
                    return Err(Error::Starvation(format!(
                        "{label} cylinder n={n} holds {c:.1} histogram counts (< {MIN_CYLINDER_COUNT})"
                    )));
                }
            }
            let m = density.mass_between(lo, hi);
            mass.push(m);
            dens.push(m / (hi - lo));
        }
        let mass_fit = loglog_fit(&ns, &mass).ok_or_else(|| Error::Starvation(format!("{label} cylinders carry no mass")))?;
        let dens_fit = loglog_fit(&ns, &dens).expect("same support as mass");
        Ok(ExponentFit {
            mass: mass_fit,
            mass_predicted: mass_pred,
            density: dens_fit,
            density_predicted: dens_pred,
        })
    };
    let near_zero_mass = -(1.0 - p.kappa + p.kappa * p.gamma) / k;
    let plus_one = fit(
        "+1",
        &|n| (table.a_plus(n - 1), table.a_plus(n)),
        near_zero_mass,
        -(1.0 - p.kappa) / k,
    )?;
    let minus_one = fit(
        "-1",
        &|n| (table.a_minus(n), table.a_minus(n - 1)),
        -1.0 / k,
        -1.0 / k - width_exp,
    )?;
    let zero = fit("0", &|n| (table.b_plus(n + 1), table.b_plus(n)), near_zero_mass, 0.0)?;
    Ok(CylinderExponents {
        trend_minus_one: EndpointTrend::classify(minus_one.density.slope, TREND_TOL),
        trend_predicted: EndpointTrend::predicted(p.kappa, p.gamma),
        plus_one,
        minus_one,
        zero,
    })
}

/// `C_r Σ_p τ_p μ̂(Z_p)` with `C_r = μ(I_0)` and `μ̂` the normalized
/// restriction of the estimate to `I_0`; equals 1 for an invariant density.
///
/// Computed as `Σ_{k≥0} μ(τ > k)` over the table, with a power-law tail
/// beyond the last `b_k`.
pub fn kac_consistency(density: &DensityEstimate, table: &PartitionTable) -> Result<f64> {
    let (lo, hi) = table.reference_set(0);
    let c_r = density.mass_between(lo, hi);
    if !(c_r > 0.0) {
        return Err(Error::Starvation("estimate puts no mass on I_0".into()));
    }
    let depth = table.depth();
    let mut total = c_r;
    for k in 1..=depth {
        total += density.mass_between(table.b_minus(k), table.b_plus(k));
    }
    let s = match table.spec().params {
        MapParams::Interval(p) => 1.0 / (p.kappa * (p.gamma - 1.0)),
        MapParams::Circle(p) => p.gamma / (p.gamma - 1.0),
    };
    let b_last = table.b_plus(depth);
    let rho0 = density.mass_between(-b_last, b_last) / (2.0 * b_last);
    let kd = depth as f64 + 0.5;
    total += 2.0 * rho0 * b_last * kd / (s - 1.0);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::build_partition;

    fn hemmer_rho(x: f64) -> f64 {
        0.5 * (1.0 - x)
    }

    #[test]
    fn circle_rejected() {
        let spec = MapSpec::circle(2.0).unwrap();
        let err = histogram_density(&spec, &Binning::Uniform { bins: 10 }, None, 10, &Sampling::default(), 1);
        assert!(matches!(err, Err(Error::Parameter(_))));
        assert!(ulam_density(&spec, &Binning::Uniform { bins: 200 }, None).is_err());
    }

    #[test]
    fn no_acip_rejected() {
        let spec = MapSpec::interval(0.9, 3.0).unwrap();
        assert!(ulam_density(&spec, &Binning::Uniform { bins: 200 }, None).is_err());
    }

    #[test]
    fn ulam_rows_are_stochastic() {
        let op = UlamOperator::new(&MapSpec::hemmer(), uniform_edges(300).unwrap()).unwrap();
        let ones = vec![1.0; 300];
        for i in 0..300 {
            let s: f64 = (op.row_start[i]..op.row_start[i + 1]).map(|k| op.probs[k]).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let pushed: f64 = op.apply(&ones).iter().sum();
        assert!((pushed - 300.0).abs() < 1e-9);
    }

    #[test]
    fn ulam_hemmer_coarse() {
        let d = ulam_density(&MapSpec::hemmer(), &Binning::Uniform { bins: 200 }, None).unwrap();
        assert!(d.residual.unwrap() <= 1e-10);
        assert!(d.l1_to(hemmer_rho) < 0.05, "{}", d.l1_to(hemmer_rho));
        let s: f64 = d.masses.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn l1_between_identical_is_zero() {
        let d = ulam_density(&MapSpec::hemmer(), &Binning::Uniform { bins: 100 }, None).unwrap();
        assert_eq!(d.l1_between(&d), 0.0);
    }

    #[test]
    fn exact_density_has_no_l1_error_on_itself() {
        let edges = uniform_edges(64).unwrap();
        let masses: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[1] - w[0])).collect();
        let d = DensityEstimate {
            method: DensityMethod::Ulam,
            edges,
            masses,
            counts: None,
            residual: None,
            iterations: None,
        };
        assert!(d.l1_to(|_| 0.5) < 1e-15);
        assert!((d.mass_between(-0.25, 0.25) - 0.25).abs() < 1e-15);
        assert_eq!(d.density_at(-1.0), Some(0.5));
    }

    #[test]
    fn graded_edges_contain_partition_points() {
        let t = build_partition(&MapSpec::hemmer(), 50).unwrap();
        let e = Binning::Graded { bins: 100, depth: 50 }.edges(Some(&t)).unwrap();
        assert!(e.contains(&t.a_plus(37)));
        assert!(e.contains(&t.b_minus(12)));
        assert!(e.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn trend_prediction() {
        assert_eq!(EndpointTrend::predicted(0.5, 2.0), EndpointTrend::Bounded);
        assert_eq!(EndpointTrend::predicted(0.7, 2.0), EndpointTrend::Diverges);
        assert_eq!(EndpointTrend::predicted(0.3, 2.0), EndpointTrend::Vanishes);
    }

    #[test]
    fn csv_layout() {
        let d = ulam_density(&MapSpec::hemmer(), &Binning::Uniform { bins: 100 }, None).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("bin_lo,bin_hi,mass,density"));
        assert_eq!(text.lines().count(), 101);
    }
}
