//! Writing risk reports as JSON or as three CSV tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::pipeline::{RiskReport, RunStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> DataError + '_ {
    move |e| DataError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    }
}

/// Serializes the report as one pretty-printed JSON document.
pub fn report_json(report: &RiskReport) -> Result<String, DataError> {
    serde_json::to_string_pretty(report).map_err(|e| DataError::Json {
        path: "<report>".into(),
        message: e.to_string(),
    })
}

/// Writes the report and returns the files created.
///
/// JSON goes to `path`. CSV writes `<stem>_weights.csv`,
/// `<stem>_ranking.csv` and `<stem>_runs.csv` next to `path`, where `stem` is
/// `path` without its extension.
pub fn emit_report(report: &RiskReport, format: ReportFormat, path: &Path) -> Result<Vec<PathBuf>, DataError> {
    match format {
        ReportFormat::Json => {
            let mut text = report_json(report)?;
            text.push('\n');
            let mut f = File::create(path).map_err(io_error(path))?;
            f.write_all(text.as_bytes()).map_err(io_error(path))?;
            Ok(vec![path.to_path_buf()])
        }
        ReportFormat::Csv => {
            let stem = path.with_extension("");
            let name = |suffix: &str| {
                let mut s = stem.clone().into_os_string();
                s.push(format!("_{suffix}.csv"));
                PathBuf::from(s)
            };
            let files = [name("weights"), name("ranking"), name("runs")];
            write_weights(report, &files[0])?;
            write_ranking(report, &files[1])?;
            write_runs(report, &files[2])?;
            Ok(files.to_vec())
        }
    }
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, DataError> {
    let f = File::create(path).map_err(io_error(path))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(f)))
}

fn write_weights(report: &RiskReport, path: &Path) -> Result<(), DataError> {
    let mut w = writer(path)?;
    let e = csv_error(path);
    w.write_record(["criterion", "weight", "r", "c", "prominence", "relation"]).map_err(&e)?;
    let d = &report.dematel;
    for (i, code) in report.criteria.iter().enumerate() {
        w.serialize((code, d.weights[i], d.r_row[i], d.c_col[i], d.prominence[i], d.relation[i]))
            .map_err(&e)?;
    }
    w.flush().map_err(io_error(path))
}

fn write_ranking(report: &RiskReport, path: &Path) -> Result<(), DataError> {
    let mut w = writer(path)?;
    let e = csv_error(path);
    w.write_record(["rank", "criterion", "index", "potential_score", "closeness", "weight"])
        .map_err(&e)?;
    for (rank, &i) in report.ranking.iter().enumerate() {
        w.serialize((
            rank + 1,
            &report.criteria[i],
            i,
            report.potential_scores[i],
            report.closeness[i],
            report.weights[i],
        ))
        .map_err(&e)?;
    }
    w.flush().map_err(io_error(path))
}

fn write_runs(report: &RiskReport, path: &Path) -> Result<(), DataError> {
    let mut w = writer(path)?;
    let e = csv_error(path);
    w.write_record([
        "scope",
        "run",
        "seed",
        "best_fitness",
        "train_rmse",
        "test_rmse",
        "iterations",
        "evaluations",
        "selected",
    ])
    .map_err(&e)?;
    let t = &report.tuning;
    let scopes = t
        .folds
        .iter()
        .map(|f| (format!("fold{}", f.fold + 1), f))
        .chain(std::iter::once(("holdout".to_string(), &t.holdout)));
    for (scope, fold) in scopes {
        for r in &fold.runs {
            let RunStats {
                run,
                seed,
                best_fitness,
                train_rmse,
                test_rmse,
                iterations,
                evaluations,
                ..
            } = r;
            w.serialize((
                &scope,
                run,
                seed,
                best_fitness,
                train_rmse,
                test_rmse,
                iterations,
                evaluations,
                *run == fold.selected_run,
            ))
            .map_err(&e)?;
        }
    }
    w.flush().map_err(io_error(path))
}
