//! Experiment configuration: flat `key = value` lines, `#` comments, and an
//! optional `[map]` table as an alternative to the `map.` prefix.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use intermap_core::lab::{
    CorrelationParams, DensityParams, DistortionParams, EvlParams, LargeDevParams, LimitParams, LyapunovParams,
    RecurrenceParams, ScalingParams,
};
use intermap_core::stats::{ObservableKind, ObservableSpec};
use intermap_core::{MapKind, MapSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Scaling,
    Distortion,
    Lyapunov,
    Correlation,
    LimitLaw,
    LargeDev,
    Recurrence,
    Visits,
    Evl,
    Density,
    Oracles,
    All,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Experiment::Scaling,
        Experiment::Distortion,
        Experiment::Lyapunov,
        Experiment::Correlation,
        Experiment::LimitLaw,
        Experiment::LargeDev,
        Experiment::Recurrence,
        Experiment::Visits,
        Experiment::Evl,
        Experiment::Density,
        Experiment::Oracles,
        Experiment::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Scaling => "scaling",
            Experiment::Distortion => "distortion",
            Experiment::Lyapunov => "lyapunov",
            Experiment::Correlation => "correlation",
            Experiment::LimitLaw => "limit_law",
            Experiment::LargeDev => "large_dev",
            Experiment::Recurrence => "recurrence",
            Experiment::Visits => "visits",
            Experiment::Evl => "evl",
            Experiment::Density => "density",
            Experiment::Oracles => "oracles",
            Experiment::All => "all",
        }
    }

    /// Whether the experiment runs on a user-chosen map.
    pub fn needs_map(self) -> bool {
        !matches!(self, Experiment::Oracles | Experiment::All)
    }

    /// Knobs the experiment reads.
    pub fn knobs(self) -> &'static [&'static str] {
        match self {
            Experiment::Scaling => &["N"],
            Experiment::Distortion => &["m", "p_max", "pairs"],
            Experiment::Lyapunov => &["samples", "n"],
            Experiment::Correlation => &["m", "n_max", "samples", "fit_lo", "fit_hi", "renewal_n"],
            Experiment::LimitLaw => &["n", "samples", "nu", "center"],
            Experiment::LargeDev => &["eps", "n_min", "n_max", "points", "samples"],
            Experiment::Recurrence => &["centers", "random_centers", "r", "samples"],
            Experiment::Visits => &["centers", "random_centers", "r", "samples", "t", "k_max"],
            Experiment::Evl => &["xi", "n", "samples", "alpha", "upper"],
            Experiment::Density => &["cells", "bins", "steps", "N", "n_lo", "n_hi"],
            Experiment::Oracles | Experiment::All => &[],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Knob {
    Int(u64),
    Real(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum KnobType {
    /// Integer >= 1.
    Count,
    /// Integer >= 0.
    Index,
    /// Real > 0.
    Positive,
    /// Any finite real.
    Real,
    RealList,
}

fn knob_type(key: &str) -> Option<KnobType> {
    use KnobType::*;
    Some(match key {
        "N" | "samples" | "n" | "n_max" | "n_min" | "p_max" | "pairs" | "bins" | "cells" | "steps" | "n_lo" | "n_hi"
        | "fit_lo" | "fit_hi" | "renewal_n" | "points" | "random_centers" | "k_max" => Count,
        "m" => Index,
        "r" | "eps" | "t" | "alpha" | "nu" => Positive,
        "center" | "xi" | "upper" => Real,
        "centers" => RealList,
        _ => return None,
    })
}

/// Every problem found in a configuration, in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Values given on the command line; they take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub map: Option<MapSpec>,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub knobs: BTreeMap<String, Knob>,
}

struct Entry {
    key: String,
    value: String,
    line: usize,
}

fn split_entries(text: &str, errors: &mut Vec<String>) -> Vec<Entry> {
    let mut entries: Vec<Entry> = Vec::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if name.is_empty() {
                errors.push(format!("line {line}: empty table name"));
            }
            section = format!("{name}.");
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            errors.push(format!("line {line}: expected `key = value`, found `{content}`"));
            continue;
        };
        let key = format!("{section}{}", canonical_key(k.trim()));
        let value = v.trim().trim_matches('"').trim().to_owned();
        if entries.iter().any(|e| e.key == key) {
            errors.push(format!("line {line}: duplicate key `{key}`"));
            continue;
        }
        entries.push(Entry { key, value, line });
    }
    entries
}

fn canonical_key(key: &str) -> &str {
    match key {
        "depth" => "N",
        "radius" => "r",
        other => other,
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_knob(key: &str, value: &str, ty: KnobType) -> Result<Knob, String> {
    match ty {
        KnobType::Count | KnobType::Index => {
            let v = parse_real(value).filter(|v| v.fract() == 0.0 && *v >= 0.0 && *v < 1.8e19);
            match v {
                Some(v) if ty == KnobType::Index || v >= 1.0 => Ok(Knob::Int(v as u64)),
                Some(_) => Err(format!("{key} must be a positive integer (got {value})")),
                None => Err(format!("{key} must be an integer (got {value})")),
            }
        }
        KnobType::Positive => match parse_real(value) {
            Some(v) if v > 0.0 => Ok(Knob::Real(v)),
            Some(_) => Err(format!("{key} must be > 0 (got {value})")),
            None => Err(format!("{key} must be a number (got {value})")),
        },
        KnobType::Real => parse_real(value)
            .map(Knob::Real)
            .ok_or_else(|| format!("{key} must be a finite number (got {value})")),
        KnobType::RealList => value
            .trim_start_matches('[')
            .trim_end_matches(']')
            .split(',')
            .map(|s| parse_real(s.trim()).ok_or_else(|| format!("{key}: `{}` is not a number", s.trim())))
            .collect::<Result<Vec<_>, _>>()
            .map(Knob::List),
    }
}

const MAP_KINDS: &str = "circle, interval or hemmer";

/// Parses a configuration with no command-line overrides.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::parse(text, &Overrides::default())
}

impl ExperimentConfig {
    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut errors = Vec::new();
        let entries = split_entries(text, &mut errors);
        let get = |k: &str| entries.iter().find(|e| e.key == k);

        let file_experiment = get("experiment").and_then(|e| match e.value.parse::<Experiment>() {
            Ok(x) => Some(x),
            Err(msg) => {
                errors.push(format!("line {}: {msg}", e.line));
                None
            }
        });
        let experiment = match (overrides.experiment, file_experiment) {
            (Some(cli), Some(file)) if cli != file => {
                errors.push(format!("experiment `{file}` in the config differs from `{cli}` on the command line"));
                Some(cli)
            }
            (Some(x), _) | (None, Some(x)) => Some(x),
            (None, None) => {
                if get("experiment").is_none() {
                    errors.push("missing required key `experiment`".into());
                }
                None
            }
        };

        let seed = match get("seed") {
            Some(e) => e.value.parse::<u64>().unwrap_or_else(|_| {
                errors.push(format!("line {}: seed must be a nonnegative integer (got {})", e.line, e.value));
                0
            }),
            None => 0,
        };
        let seed = overrides.seed.unwrap_or(seed);

        let workers = match get("workers") {
            Some(e) => match e.value.parse::<usize>() {
                Ok(w) if w >= 1 => Some(w),
                _ => {
                    errors.push(format!("line {}: workers must be a positive integer (got {})", e.line, e.value));
                    None
                }
            },
            None => None,
        };
        if overrides.workers == Some(0) {
            errors.push("workers must be a positive integer (got 0)".into());
        }
        let workers = overrides.workers.or(workers);
        let out = overrides.out.clone().or_else(|| get("out").map(|e| PathBuf::from(&e.value)));

        let map = parse_map(&entries, &mut errors);

        let mut knobs = BTreeMap::new();
        for e in &entries {
            if matches!(e.key.as_str(), "experiment" | "seed" | "workers" | "out") || e.key.starts_with("map.") {
                if e.key.starts_with("map.") && !matches!(e.key.as_str(), "map.kind" | "map.gamma" | "map.kappa") {
                    errors.push(format!("line {}: unknown key `{}`", e.line, e.key));
                }
                continue;
            }
            let Some(ty) = knob_type(&e.key) else {
                errors.push(format!("line {}: unknown key `{}`", e.line, e.key));
                continue;
            };
            if let Some(x) = experiment {
                if !x.knobs().contains(&e.key.as_str()) {
                    errors.push(format!("line {}: key `{}` is not used by experiment `{x}`", e.line, e.key));
                    continue;
                }
            }
            match parse_knob(&e.key, &e.value, ty) {
                Ok(k) => {
                    knobs.insert(e.key.clone(), k);
                }
                Err(msg) => errors.push(format!("line {}: {msg}", e.line)),
            }
        }

        if let Some(x) = experiment {
            match (&map, get("map.kind")) {
                (None, None) if x.needs_map() => errors.push(format!("missing required key `map.kind` for experiment `{x}`")),
                (Some(_), _) | (None, Some(_)) if !x.needs_map() => {
                    errors.push(format!("experiment `{x}` runs fixed maps; remove the map keys"))
                }
                _ => {}
            }
            if let Some(m) = map {
                check_experiment_map(x, &m, &mut errors);
            }
        }

        if !errors.is_empty() {
            return Err(ConfigError { violations: errors });
        }
        let cfg = ExperimentConfig {
            experiment: experiment.expect("checked"),
            map,
            seed,
            workers,
            out,
            knobs,
        };
        cfg.check_knob_relations()?;
        Ok(cfg)
    }

    /// Canonical text of everything that determines the results (workers
    /// and the output directory excluded).
    pub fn canonical(&self) -> String {
        serde_json::json!({
            "experiment": self.experiment,
            "map": self.map,
            "seed": self.seed,
            "knobs": self.knobs,
            "table_version": intermap_core::acceptance::TABLE_VERSION,
        })
        .to_string()
    }

    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    fn count(&self, key: &str) -> Option<usize> {
        match self.knobs.get(key) {
            Some(Knob::Int(v)) => Some(*v as usize),
            _ => None,
        }
    }

    fn real(&self, key: &str) -> Option<f64> {
        match self.knobs.get(key) {
            Some(Knob::Real(v)) => Some(*v),
            Some(Knob::Int(v)) => Some(*v as f64),
            _ => None,
        }
    }

    fn check_knob_relations(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        let pair = |lo: &str, hi: &str, dlo: usize, dhi: usize, errors: &mut Vec<String>| {
            let (a, b) = (self.count(lo).unwrap_or(dlo), self.count(hi).unwrap_or(dhi));
            if a >= b {
                errors.push(format!("{lo} ({a}) must be smaller than {hi} ({b})"));
            }
        };
        match self.experiment {
            Experiment::Correlation => {
                let d = CorrelationParams::default();
                pair("fit_lo", "fit_hi", d.fit_lo, d.fit_hi, &mut errors);
                let n_max = self.count("n_max").unwrap_or(d.n_max);
                for k in ["fit_hi", "renewal_n"] {
                    let v = self.count(k).unwrap_or(if k == "fit_hi" { d.fit_hi } else { d.renewal_n });
                    if v > n_max {
                        errors.push(format!("{k} ({v}) must not exceed n_max ({n_max})"));
                    }
                }
                if self.count("samples").unwrap_or(d.samples) < intermap_core::stats::correlation::MIN_CORRELATION_SAMPLES {
                    errors.push(format!(
                        "correlation needs samples >= {}",
                        intermap_core::stats::correlation::MIN_CORRELATION_SAMPLES
                    ));
                }
            }
            Experiment::LargeDev => {
                let d = LargeDevParams::default();
                pair("n_min", "n_max", d.n_min, d.n_max, &mut errors);
            }
            Experiment::Density => {
                let d = DensityParams::default();
                pair("n_lo", "n_hi", d.n_lo, d.n_hi, &mut errors);
                let depth = self.count("N").unwrap_or(d.depth);
                let n_hi = self.count("n_hi").unwrap_or(d.n_hi);
                if n_hi + 1 > depth {
                    errors.push(format!("n_hi ({n_hi}) must be below the partition depth N ({depth})"));
                }
                if self.count("cells").unwrap_or(d.ulam_cells) < intermap_core::density::MIN_ULAM_CELLS {
                    errors.push(format!("cells must be >= {}", intermap_core::density::MIN_ULAM_CELLS));
                }
            }
            Experiment::Distortion => {
                if self.count("p_max").unwrap_or(DistortionParams::default().p_max) < 50 {
                    errors.push("p_max must be >= 50".into());
                }
            }
            Experiment::LimitLaw | Experiment::Evl => {
                if let Some(n) = self.count("n") {
                    if self.experiment == Experiment::LimitLaw && n < intermap_core::stats::limit::MIN_BIRKHOFF_LENGTH {
                        errors.push(format!("n must be >= {}", intermap_core::stats::limit::MIN_BIRKHOFF_LENGTH));
                    }
                }
                for k in ["center", "xi"] {
                    if let Some(v) = self.real(k) {
                        if v.abs() >= 1.0 {
                            errors.push(format!("{k} must lie in (-1, 1) (got {v})"));
                        }
                    }
                }
            }
            Experiment::Scaling => {
                if self.count("N").unwrap_or(ScalingParams::default().depth) < 1000 {
                    errors.push("N must be >= 1000 for the scaling fit".into());
                }
            }
            _ => {}
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations: errors })
        }
    }

    fn map_or(&self, default: MapSpec) -> MapSpec {
        self.map.unwrap_or(default)
    }

    pub fn scaling_params(&self) -> ScalingParams {
        let d = ScalingParams::default();
        ScalingParams {
            map: self.map_or(d.map),
            depth: self.count("N").unwrap_or(d.depth),
        }
    }

    pub fn distortion_params(&self) -> DistortionParams {
        let d = DistortionParams::default();
        DistortionParams {
            map: self.map_or(d.map),
            m: self.count("m").unwrap_or(d.m),
            p_max: self.count("p_max").unwrap_or(d.p_max),
            pairs: self.count("pairs").unwrap_or(d.pairs),
        }
    }

    pub fn lyapunov_params(&self) -> LyapunovParams {
        let d = LyapunovParams::registered(self.map_or(MapSpec::hemmer()));
        LyapunovParams {
            samples: self.count("samples").unwrap_or(d.samples),
            n: self.count("n").unwrap_or(d.n),
            ..d
        }
    }

    pub fn density_params(&self) -> DensityParams {
        let d = DensityParams::default();
        DensityParams {
            map: self.map_or(d.map),
            ulam_cells: self.count("cells").unwrap_or(d.ulam_cells),
            bins: self.count("bins").unwrap_or(d.bins),
            steps: self.count("steps").unwrap_or(d.steps),
            depth: self.count("N").unwrap_or(d.depth),
            n_lo: self.count("n_lo").unwrap_or(d.n_lo),
            n_hi: self.count("n_hi").unwrap_or(d.n_hi),
        }
    }

    pub fn correlation_params(&self) -> CorrelationParams {
        let d = CorrelationParams::default();
        CorrelationParams {
            map: self.map_or(d.map),
            m: self.count("m").unwrap_or(d.m),
            n_max: self.count("n_max").unwrap_or(d.n_max),
            samples: self.count("samples").unwrap_or(d.samples),
            fit_lo: self.count("fit_lo").unwrap_or(d.fit_lo),
            fit_hi: self.count("fit_hi").unwrap_or(d.fit_hi),
            renewal_n: self.count("renewal_n").unwrap_or(d.renewal_n),
        }
    }

    pub fn limit_params(&self) -> LimitParams {
        let d = LimitParams::registered(self.map_or(MapSpec::circle(1.5).expect("valid")));
        let observable = match (self.real("nu"), self.real("center")) {
            (None, None) => d.observable,
            (nu, center) => {
                let (dnu, dcenter) = match d.observable.kind {
                    ObservableKind::HolderPower { nu, center } => (nu, center),
                    _ => (1.0, 0.0),
                };
                ObservableSpec::new(ObservableKind::HolderPower {
                    nu: nu.unwrap_or(dnu),
                    center: center.unwrap_or(dcenter),
                })
                .centered()
            }
        };
        LimitParams {
            observable,
            n: self.count("n").unwrap_or(d.n),
            samples: self.count("samples").unwrap_or(d.samples),
            ..d
        }
    }

    pub fn large_dev_params(&self) -> LargeDevParams {
        let d = LargeDevParams::default();
        LargeDevParams {
            map: self.map_or(d.map),
            eps: self.real("eps").unwrap_or(d.eps),
            n_min: self.count("n_min").unwrap_or(d.n_min),
            n_max: self.count("n_max").unwrap_or(d.n_max),
            points: self.count("points").unwrap_or(d.points),
            samples: self.count("samples").unwrap_or(d.samples),
            ..d
        }
    }

    pub fn recurrence_params(&self) -> RecurrenceParams {
        let d = RecurrenceParams::default();
        RecurrenceParams {
            map: self.map_or(d.map),
            centers: match self.knobs.get("centers") {
                Some(Knob::List(v)) => v.clone(),
                Some(Knob::Real(v)) => vec![*v],
                _ => d.centers,
            },
            random_centers: self.count("random_centers").unwrap_or(d.random_centers),
            radius: self.real("r").unwrap_or(d.radius),
            samples: self.count("samples").unwrap_or(d.samples),
            t: self.real("t").unwrap_or(d.t),
            k_max: self.count("k_max").unwrap_or(d.k_max),
        }
    }

    pub fn evl_params(&self) -> EvlParams {
        let d = EvlParams::default();
        EvlParams {
            map: self.map_or(d.map),
            xi: self.real("xi").or(d.xi),
            n: self.count("n").unwrap_or(d.n),
            samples: self.count("samples").unwrap_or(d.samples),
            alpha: self.real("alpha").unwrap_or(d.alpha),
            upper: self.real("upper").unwrap_or(d.upper),
        }
    }
}

fn parse_map(entries: &[Entry], errors: &mut Vec<String>) -> Option<MapSpec> {
    let get = |k: &str| entries.iter().find(|e| e.key == k);
    let Some(kind) = get("map.kind") else {
        if let Some(g) = get("map.gamma").and_then(|e| parse_real(&e.value)) {
            if g <= 1.0 {
                errors.push("gamma must be > 1".into());
            }
        }
        return None;
    };
    let number = |key: &str, errors: &mut Vec<String>| -> Option<f64> {
        match get(key) {
            None => {
                errors.push(format!("missing required key `{key}` for map.kind = {}", kind.value));
                None
            }
            Some(e) => parse_real(&e.value).or_else(|| {
                errors.push(format!("line {}: {key} must be a number (got {})", e.line, e.value));
                None
            }),
        }
    };
    let gamma_ok = |g: f64, errors: &mut Vec<String>| {
        if g > 1.0 {
            true
        } else {
            errors.push("gamma must be > 1".into());
            false
        }
    };
    match kind.value.as_str() {
        "circle" => {
            if get("map.kappa").is_some() {
                errors.push("map.kappa is only used by the interval map".into());
            }
            let g = number("map.gamma", errors)?;
            gamma_ok(g, errors).then(|| MapSpec::circle(g).expect("validated"))
        }
        "interval" => {
            let g = number("map.gamma", errors);
            let k = number("map.kappa", errors);
            let g = g.filter(|&g| gamma_ok(g, errors));
            let k = k.filter(|&k| {
                let ok = k > 0.0 && k < 1.0;
                if !ok {
                    errors.push("kappa must lie in (0, 1)".into());
                }
                ok
            });
            MapSpec::interval(k?, g?).ok()
        }
        "hemmer" => {
            if get("map.gamma").is_some() || get("map.kappa").is_some() {
                errors.push("map.kind = hemmer fixes gamma and kappa; remove them".into());
            }
            Some(MapSpec::hemmer())
        }
        other => {
            errors.push(format!("line {}: map.kind must be {MAP_KINDS} (got `{other}`)", kind.line));
            None
        }
    }
}

fn check_experiment_map(x: Experiment, m: &MapSpec, errors: &mut Vec<String>) {
    use intermap_core::MapParams;
    if x == Experiment::Density {
        match m.params {
            MapParams::Circle(_) => errors.push("density requires interval map".into()),
            MapParams::Interval(p) if !p.has_acip() => errors.push(format!(
                "density requires kappa*(gamma-1) < 1 (got {})",
                p.kappa * (p.gamma - 1.0)
            )),
            _ => {}
        }
    }
    if x == Experiment::Correlation && m.kind() == MapKind::Interval {
        if let MapParams::Interval(p) = m.params {
            if !p.has_acip() {
                errors.push("correlation requires kappa*(gamma-1) < 1 on the interval map".into());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_scaling_config() {
        let cfg = parse_config("experiment=scaling\nmap.kind=circle\nmap.gamma=2.0\nN=100000\nseed=1").unwrap();
        assert_eq!(cfg.experiment, Experiment::Scaling);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.scaling_params().depth, 100_000);
        assert_eq!(cfg.map, Some(MapSpec::circle(2.0).unwrap()));
    }

    #[test]
    fn gamma_must_exceed_one() {
        let err = parse_config("map.gamma=1.0").unwrap_err();
        assert!(err.violations.iter().any(|v| v == "gamma must be > 1"), "{err}");
        let err = parse_config("experiment=scaling\nmap.kind=circle\nmap.gamma=1.0").unwrap_err();
        assert!(err.violations.iter().any(|v| v == "gamma must be > 1"), "{err}");
    }

    #[test]
    fn density_needs_interval_map() {
        let err = parse_config("experiment=density\nmap.kind=circle\nmap.gamma=2").unwrap_err();
        assert!(err.violations.iter().any(|v| v == "density requires interval map"), "{err}");
    }

    #[test]
    fn all_violations_reported() {
        let err = parse_config("experiment=scaling\nmap.kind=circle\nmap.gamma=0.5\nbogus=1\nN=-3\nbins=10").unwrap_err();
        assert_eq!(err.violations.len(), 4, "{err}");
        assert!(err.violations.iter().any(|v| v.contains("unknown key `bogus`")));
        assert!(err.violations.iter().any(|v| v.contains("`bins` is not used")));
        assert!(err.violations.iter().any(|v| v.contains("N must be")));
    }

    #[test]
    fn missing_keys_named() {
        let err = parse_config("map.kind=interval\nmap.gamma=2").unwrap_err();
        assert!(err.violations.iter().any(|v| v.contains("`experiment`")));
        assert!(err.violations.iter().any(|v| v.contains("`map.kappa`")));
    }

    #[test]
    fn map_table_and_comments() {
        let text = "# comment\nexperiment = density  # trailing\n[map]\nkind = \"interval\"\ngamma = 2\nkappa = 0.5\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.map, Some(MapSpec::interval(0.5, 2.0).unwrap()));
    }

    #[test]
    fn overrides_and_conflicts() {
        let o = Overrides {
            experiment: Some(Experiment::Scaling),
            seed: Some(9),
            ..Overrides::default()
        };
        let cfg = ExperimentConfig::parse("map.kind=circle\nmap.gamma=2\nseed=3", &o).unwrap();
        assert_eq!(cfg.seed, 9);
        let o = Overrides {
            experiment: Some(Experiment::Evl),
            ..Overrides::default()
        };
        assert!(ExperimentConfig::parse("experiment=scaling\nmap.kind=circle\nmap.gamma=2", &o).is_err());
    }

    #[test]
    fn hash_ignores_workers_and_out() {
        let a = parse_config("experiment=scaling\nmap.kind=circle\nmap.gamma=2\nworkers=1").unwrap();
        let b = parse_config("experiment=scaling\nmap.kind=circle\nmap.gamma=2\nworkers=4\nout=/tmp/x").unwrap();
        let c = parse_config("experiment=scaling\nmap.kind=circle\nmap.gamma=3").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn scientific_notation_counts() {
        let cfg = parse_config("experiment=density\nmap.kind=hemmer\nsteps=1e6").unwrap();
        assert_eq!(cfg.density_params().steps, 1_000_000);
        assert!(parse_config("experiment=density\nmap.kind=hemmer\nsteps=1.5").is_err());
    }

    #[test]
    fn fixed_map_experiments_reject_maps() {
        assert!(parse_config("experiment=oracles").is_ok());
        assert!(parse_config("experiment=oracles\nmap.kind=hemmer").is_err());
    }
}
