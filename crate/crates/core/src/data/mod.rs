//! Dataset ingestion, criteria mapping, judgment files and report output.

pub mod catalog;
pub mod dataset;
pub mod judgments;
pub mod report;

use std::io;

use thiserror::Error;

pub use catalog::{
    map_ratings_to_features, ColumnSource, CriteriaCatalog, Criterion, FeatureMapping, MappingConfig,
    OrdinalLevels, RiskDirection, DEFAULT_CRITERIA,
};
pub use dataset::{load_dataset, DatasetFormat, FieldValue, ProjectRecord, Rating};
pub use judgments::{load_judgments, JudgmentEntry, JudgmentsFile};
pub use report::{emit_report, ReportFormat};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown token `{token}` in column `{column}`")]
    UnknownToken {
        line: usize,
        column: String,
        token: String,
    },
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error("unmapped criterion: {0}")]
    UnmappedCode(String),
    #[error("record {record}: missing value for `{column}`")]
    Missing { record: String, column: String },
    #[error("judgments: {0}")]
    Judgment(String),
    #[error("dataset has no records")]
    Empty,
}
