//! Pre-registered tolerances. A metric passes or fails only against the
//! bound recorded here; nothing in a run configuration can loosen it.

use serde::{Deserialize, Serialize};

/// Bumped whenever a bound or metric in [`TABLE`] changes.
pub const TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    PartitionScaling,
    ClosedForm,
    TailMeasure,
    Distortion,
    Lyapunov,
    HemmerDensity,
    CorrelationDecay,
    LimitLaws,
    Recurrence,
    ExtremeValues,
    LargeDeviations,
    Oracles,
}

impl Criterion {
    pub const ALL: [Criterion; 12] = [
        Criterion::PartitionScaling,
        Criterion::ClosedForm,
        Criterion::TailMeasure,
        Criterion::Distortion,
        Criterion::Lyapunov,
        Criterion::HemmerDensity,
        Criterion::CorrelationDecay,
        Criterion::LimitLaws,
        Criterion::Recurrence,
        Criterion::ExtremeValues,
        Criterion::LargeDeviations,
        Criterion::Oracles,
    ];

    /// One-based position in the acceptance list.
    pub fn number(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).expect("listed") + 1
    }

    pub fn title(self) -> &'static str {
        match self {
            Criterion::PartitionScaling => "partition scaling",
            Criterion::ClosedForm => "closed-form identities",
            Criterion::TailMeasure => "tail measure",
            Criterion::Distortion => "bounded distortion",
            Criterion::Lyapunov => "Lyapunov exponents",
            Criterion::HemmerDensity => "Hemmer density",
            Criterion::CorrelationDecay => "correlation decay",
            Criterion::LimitLaws => "limit laws",
            Criterion::Recurrence => "recurrence statistics",
            Criterion::ExtremeValues => "extreme value laws",
            Criterion::LargeDeviations => "large deviations",
            Criterion::Oracles => "oracle checks",
        }
    }
}

/// Admissible region for a metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Bound {
    Within { lo: f64, hi: f64 },
    Abs { target: f64, tol: f64 },
    Rel { target: f64, tol: f64 },
    AtMost { max: f64 },
}

impl Bound {
    pub fn admits(&self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match *self {
            Bound::Within { lo, hi } => (lo..=hi).contains(&v),
            Bound::Abs { target, tol } => (v - target).abs() <= tol,
            Bound::Rel { target, tol } => (v / target - 1.0).abs() <= tol,
            Bound::AtMost { max } => v <= max,
        }
    }

    pub fn reference(&self) -> Option<f64> {
        match *self {
            Bound::Abs { target, .. } | Bound::Rel { target, .. } => Some(target),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Bound::Within { lo, hi } => format!("[{}, {}]", num(lo), num(hi)),
            Bound::Abs { target, tol } => format!("{} ± {}", num(target), num(tol)),
            Bound::Rel { target, tol } => format!("{} ± {}%", num(target), tol * 100.0),
            Bound::AtMost { max } => format!("<= {}", num(max)),
        }
    }
}

fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub metric: &'static str,
    pub criterion: Criterion,
    pub bound: Bound,
}

const fn check(metric: &'static str, criterion: Criterion, bound: Bound) -> Check {
    Check { metric, criterion, bound }
}

use Bound::*;
use Criterion::*;

pub const TABLE: &[Check] = &[
    check("gap_constant", PartitionScaling, Within { lo: 3.92, hi: 4.08 }),
    check("length_constant", PartitionScaling, Within { lo: 3.8, hi: 4.2 }),
    check("circle_closed_form_error", ClosedForm, AtMost { max: 1e-12 }),
    check("hemmer_closed_form_error", ClosedForm, AtMost { max: 1e-12 }),
    check("circle_tail_scaled", TailMeasure, Rel { target: 8.0, tol: 0.02 }),
    check("hemmer_tail_scaled", TailMeasure, Rel { target: 8.0, tol: 0.05 }),
    check("k_hat_ratio_50_10", Distortion, AtMost { max: 1.05 }),
    check("distortion_violations", Distortion, AtMost { max: 0.0 }),
    check("hemmer_lyapunov", Lyapunov, Abs { target: 0.5, tol: 0.01 }),
    check("circle_lyapunov", Lyapunov, Abs { target: 0.5, tol: 0.01 }),
    check("ulam_l1", HemmerDensity, AtMost { max: 5e-3 }),
    check("histogram_l1", HemmerDensity, AtMost { max: 1e-2 }),
    check("plus_one_mass_exponent", HemmerDensity, Abs { target: -3.0, tol: 0.3 }),
    check("correlation_slope", CorrelationDecay, Abs { target: -1.0, tol: 0.15 }),
    check("correlation_over_renewal", CorrelationDecay, Rel { target: 1.0, tol: 0.2 }),
    check("clt_ks", LimitLaws, AtMost { max: 0.02 }),
    check("stable_ks", LimitLaws, AtMost { max: 0.1 }),
    check("return_ks", Recurrence, AtMost { max: 0.02 }),
    check("hitting_ks", Recurrence, AtMost { max: 0.02 }),
    check("visits_tv", Recurrence, AtMost { max: 0.03 }),
    check("gumbel_ks", ExtremeValues, AtMost { max: 0.05 }),
    check("frechet_ks", ExtremeValues, AtMost { max: 0.05 }),
    check("weibull_ks", ExtremeValues, AtMost { max: 0.05 }),
    check("large_deviation_slope", LargeDeviations, Abs { target: -1.0, tol: 0.25 }),
    check("stable_gaussian_error", Oracles, AtMost { max: 1e-6 }),
    check("kac_sum", Oracles, Rel { target: 2.0, tol: 0.01 }),
    check("histogram_ulam_l1", Oracles, AtMost { max: 1e-2 }),
];

pub fn lookup(metric: &str) -> Option<&'static Check> {
    TABLE.iter().find(|c| c.metric == metric)
}

pub fn checks_for(criterion: Criterion) -> impl Iterator<Item = &'static Check> {
    TABLE.iter().filter(move |c| c.criterion == criterion)
}

/// One measured quantity, judged against [`TABLE`] when it is registered
/// there and reported for information otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub params: String,
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub tolerance: Option<String>,
    pub reference: Option<f64>,
    pub criterion: Option<Criterion>,
    pub pass: bool,
}

impl ReportRow {
    pub fn judged(experiment: &str, params: impl Into<String>, metric: &str, value: f64, stderr: Option<f64>) -> Self {
        let check = lookup(metric).unwrap_or_else(|| panic!("metric {metric} is not in the acceptance table"));
        Self {
            experiment: experiment.to_owned(),
            params: params.into(),
            metric: metric.to_owned(),
            value,
            stderr,
            tolerance: Some(check.bound.describe()),
            reference: check.bound.reference(),
            criterion: Some(check.criterion),
            pass: check.bound.admits(value),
        }
    }

    pub fn info(experiment: &str, params: impl Into<String>, metric: &str, value: f64, stderr: Option<f64>) -> Self {
        Self {
            experiment: experiment.to_owned(),
            params: params.into(),
            metric: metric.to_owned(),
            value,
            stderr,
            tolerance: None,
            reference: None,
            criterion: None,
            pass: true,
        }
    }

    pub fn with_reference(mut self, reference: f64) -> Self {
        self.reference = Some(reference);
        self
    }
}

/// PASS/FAIL verdict for a criterion from its judged rows.
pub fn verdict(criterion: Criterion, rows: &[ReportRow]) -> bool {
    let judged: Vec<&ReportRow> = rows.iter().filter(|r| r.criterion == Some(criterion)).collect();
    !judged.is_empty() && judged.iter().all(|r| r.pass)
}
