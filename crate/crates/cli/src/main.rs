use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use intermap_cli::run::EXIT_CONFIG;
use intermap_cli::{execute, outcome_code, Experiment, ExperimentConfig, Overrides, RunError};

/// Output directory used when neither `--out` nor the config names one.
const OUT_ENV: &str = "INTERMAP_LAB_OUT";
const DEFAULT_OUT: &str = "intermap-out";

#[derive(Debug, Parser)]
#[command(name = "intermap-lab", version, about = "Run intermittent-map experiments and check them against the acceptance table")]
struct Cli {
    /// scaling, distortion, lyapunov, correlation, limit_law, large_dev,
    /// recurrence, visits, evl, density, oracles or all
    experiment: Experiment,

    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: PathBuf,

    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,

    /// Output directory (default: $INTERMAP_LAB_OUT, then ./intermap-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let overrides = Overrides {
        experiment: Some(cli.experiment),
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out,
    };
    let cfg = match ExperimentConfig::parse(&text, &overrides) {
        Ok(cfg) => cfg,
        Err(e) => return fail(RunError::Config(e)),
    };
    let out = cfg
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    match execute(&cfg, &out) {
        Ok((outcome, files)) => {
            for r in &outcome.rows {
                let verdict = match (&r.tolerance, r.pass) {
                    (None, _) => "info",
                    (Some(_), true) => "PASS",
                    (Some(_), false) => "FAIL",
                };
                let tol = r.tolerance.as_deref().unwrap_or("");
                println!("{verdict:4}  {:<28} {:>14.6e}  {tol:<16} {}", r.metric, r.value, r.params);
            }
            for f in &files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome_code(&outcome))
        }
        Err(e) => fail(e),
    }
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}
