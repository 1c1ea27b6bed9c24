//! Report files: a flat CSV of rows, a JSON summary, and one CSV per data
//! series. Every file carries the config hash and seed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use intermap_core::acceptance::{ReportRow, TABLE_VERSION};
use intermap_core::lab::Series;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const REPORT_CSV: &str = "report.csv";
pub const SUMMARY_JSON: &str = "summary.json";

pub const REPORT_COLUMNS: [&str; 11] = [
    "config_hash",
    "seed",
    "experiment",
    "params",
    "metric",
    "value",
    "stderr",
    "tolerance",
    "reference",
    "criterion",
    "pass",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("refusing to write a report with no rows")]
    Empty,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: missing or malformed config hash")]
    MissingHash { path: PathBuf },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_owned(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.to_owned(),
        source,
    }
}

/// Identifies the run that produced an artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStamp {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub table_version: u32,
    pub all_pass: bool,
    pub rows: Vec<ReportRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>, ReportError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn is_hash(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| b.is_ascii_hexdigit())
}

/// Writes `report.csv` and `summary.json` into `dir`.
pub fn emit_report(dir: &Path, stamp: &RunStamp, rows: &[ReportRow]) -> Result<Vec<PathBuf>, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let csv_path = dir.join(REPORT_CSV);
    let mut w = csv::Writer::from_writer(create(&csv_path)?);
    w.write_record(REPORT_COLUMNS).map_err(csv_err(&csv_path))?;
    let seed = stamp.seed.to_string();
    for r in rows {
        let criterion = r.criterion.map(|c| c.number().to_string()).unwrap_or_default();
        w.write_record([
            stamp.config_hash.as_str(),
            &seed,
            &r.experiment,
            &r.params,
            &r.metric,
            &r.value.to_string(),
            &opt(r.stderr),
            r.tolerance.as_deref().unwrap_or(""),
            &opt(r.reference),
            &criterion,
            if r.pass { "true" } else { "false" },
        ])
        .map_err(csv_err(&csv_path))?;
    }
    w.flush().map_err(io_err(&csv_path))?;

    let json_path = dir.join(SUMMARY_JSON);
    let summary = Summary {
        experiment: stamp.experiment.clone(),
        config_hash: stamp.config_hash.clone(),
        seed: stamp.seed,
        table_version: TABLE_VERSION,
        all_pass: rows.iter().all(|r| r.pass),
        rows: rows.to_vec(),
    };
    let mut f = create(&json_path)?;
    serde_json::to_writer_pretty(&mut f, &summary).map_err(|source| ReportError::Json {
        path: json_path.clone(),
        source,
    })?;
    f.write_all(b"\n").and_then(|_| f.flush()).map_err(io_err(&json_path))?;

    Ok(vec![csv_path, json_path])
}

/// Writes each series to `series_<name>.csv`, hash and seed first.
pub fn write_series(dir: &Path, stamp: &RunStamp, series: &[Series]) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut paths = Vec::new();
    for s in series {
        let path = dir.join(format!("series_{}.csv", s.name));
        let mut w = csv::Writer::from_writer(create(&path)?);
        let mut header = vec!["config_hash".to_owned(), "seed".to_owned()];
        header.extend(s.columns.iter().cloned());
        w.write_record(&header).map_err(csv_err(&path))?;
        let seed = stamp.seed.to_string();
        for row in &s.rows {
            let mut rec = vec![stamp.config_hash.clone(), seed.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Loads a report directory, rejecting it unless the summary and every CSV
/// row carry the same well-formed config hash.
pub fn load_report(dir: &Path) -> Result<Summary, ReportError> {
    let json_path = dir.join(SUMMARY_JSON);
    let text = fs::read_to_string(&json_path).map_err(io_err(&json_path))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|source| ReportError::Json {
        path: json_path.clone(),
        source,
    })?;
    if !value.get("config_hash").and_then(|h| h.as_str()).is_some_and(is_hash) {
        return Err(ReportError::MissingHash { path: json_path });
    }
    let summary: Summary = serde_json::from_value(value).map_err(|source| ReportError::Json {
        path: json_path.clone(),
        source,
    })?;

    let csv_path = dir.join(REPORT_CSV);
    let mut r = csv::Reader::from_path(&csv_path).map_err(csv_err(&csv_path))?;
    let headers = r.headers().map_err(csv_err(&csv_path))?.clone();
    if headers.get(0) != Some("config_hash") {
        return Err(ReportError::MissingHash { path: csv_path });
    }
    for rec in r.records() {
        let rec = rec.map_err(csv_err(&csv_path))?;
        if rec.get(0) != Some(summary.config_hash.as_str()) {
            return Err(ReportError::MissingHash { path: csv_path });
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stamp() -> RunStamp {
        RunStamp {
            experiment: "scaling".into(),
            config_hash: "ab".repeat(32),
            seed: 7,
        }
    }

    #[test]
    fn one_row_gives_two_files() {
        let dir = tempfile::tempdir().unwrap();
        let rows = [ReportRow::judged("scaling", "circle", "gap_constant", 4.0, None)];
        let files = emit_report(dir.path(), &stamp(), &rows).unwrap();
        assert_eq!(files.len(), 2);
        let csv = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("config_hash,seed,experiment,"));
        let summary = load_report(dir.path()).unwrap();
        assert!(summary.all_pass);
        assert_eq!(summary.seed, 7);
    }

    #[test]
    fn failing_row_clears_all_pass() {
        let dir = tempfile::tempdir().unwrap();
        let rows = [
            ReportRow::judged("scaling", "circle", "gap_constant", 4.0, None),
            ReportRow::judged("scaling", "circle", "length_constant", 5.0, None),
        ];
        emit_report(dir.path(), &stamp(), &rows).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_JSON)).unwrap()).unwrap();
        assert_eq!(json["all_pass"], serde_json::Value::Bool(false));
    }

    #[test]
    fn empty_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_report(dir.path(), &stamp(), &[]), Err(ReportError::Empty)));
    }

    #[test]
    fn report_without_hash_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let rows = [ReportRow::info("scaling", "", "x", 1.0, None)];
        let bad = RunStamp {
            config_hash: String::new(),
            ..stamp()
        };
        emit_report(dir.path(), &bad, &rows).unwrap();
        assert!(matches!(load_report(dir.path()), Err(ReportError::MissingHash { .. })));
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let rows = [ReportRow::info("scaling", "", "x", 1.0, None)];
        let err = emit_report(&blocker.join("sub"), &stamp(), &rows).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
