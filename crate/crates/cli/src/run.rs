//! Dispatch from a validated configuration to the experiment runners, and
//! the mapping from outcomes to process exit codes.

use std::path::Path;

use intermap_core::acceptance::Criterion;
use intermap_core::lab::{self, Outcome};
use intermap_core::Error;
use thiserror::Error;

use crate::config::{ConfigError, Experiment, ExperimentConfig};
use crate::report::{emit_report, write_series, ReportError, RunStamp};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Numerical(#[from] Error),

    #[error(transparent)]
    Report(#[from] ReportError),

    #[error("{0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numerical(Error::Parameter(_) | Error::Domain(_)) => EXIT_CONFIG,
            RunError::Numerical(_) => EXIT_NUMERICAL,
            RunError::Report(_) | RunError::Io(_) => EXIT_IO,
        }
    }
}

/// Runs the configured experiment on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let seed = cfg.seed;
    match cfg.experiment {
        Experiment::Scaling => lab::scaling(&cfg.scaling_params()),
        Experiment::Distortion => lab::distortion(&cfg.distortion_params(), seed),
        Experiment::Lyapunov => lab::lyapunov(&cfg.lyapunov_params(), seed),
        Experiment::Correlation => lab::correlation(&cfg.correlation_params(), seed),
        Experiment::LimitLaw => lab::limit_law(&cfg.limit_params(), seed),
        Experiment::LargeDev => lab::large_deviations(&cfg.large_dev_params(), seed),
        Experiment::Recurrence => lab::recurrence(&cfg.recurrence_params(), seed),
        Experiment::Visits => lab::visits(&cfg.recurrence_params(), seed),
        Experiment::Evl => lab::extremes(&cfg.evl_params(), seed),
        Experiment::Density => lab::density(&cfg.density_params(), seed),
        Experiment::Oracles => lab::oracles(seed),
        Experiment::All => {
            let mut out = Outcome::default();
            for c in Criterion::ALL {
                let o = lab::run_criterion(c, seed)?;
                out.rows.extend(o.rows);
                out.series.extend(o.series);
            }
            Ok(out)
        }
    }
}

/// Runs the experiment with `workers` threads and writes every artifact
/// into `out`. Returns the outcome and the files written.
pub fn execute(cfg: &ExperimentConfig, out: &Path) -> Result<(Outcome, Vec<std::path::PathBuf>), RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| RunError::Io(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| run_experiment(cfg))?;
    let stamp = RunStamp {
        experiment: cfg.experiment.to_string(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
    };
    let mut files = emit_report(out, &stamp, &outcome.rows)?;
    files.extend(write_series(out, &stamp, &outcome.series)?);
    Ok((outcome, files))
}

/// Exit code for a finished run.
pub fn outcome_code(outcome: &Outcome) -> u8 {
    if outcome.all_pass() {
        EXIT_PASS
    } else {
        EXIT_ACCEPTANCE
    }
}
