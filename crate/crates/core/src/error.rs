use std::path::PathBuf;

use thiserror::Error;

use crate::model::{CellKey, Population, StageClass};

/// Failures while reading a scenario bundle from disk.
#[derive(Debug, Error)]
pub enum BundleError {
    #[error("bundle directory {0} does not exist")]
    MissingDirectory(PathBuf),

    #[error("missing mandatory table {0}")]
    MissingTable(&'static str),

    #[error("{file}: unexpected header {found:?}, expected {expected:?}")]
    Header {
        file: String,
        found: Vec<String>,
        expected: Vec<&'static str>,
    },

    #[error("{file}:{line}:{column}: {message}")]
    Parse {
        file: String,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{file}:{line}:{column}: unknown token {token:?}")]
    UnknownToken {
        file: String,
        line: u64,
        column: String,
        token: String,
    },

    #[error("{file}:{line}: currency field absent")]
    MissingCurrency { file: String, line: u64 },

    #[error("{file}:{line}: unknown resource {resource:?}")]
    UnknownResource {
        file: String,
        line: u64,
        resource: String,
    },

    #[error("{file}: {message}")]
    Table { file: String, message: String },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Domain errors raised by the model operations.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("mortality-to-incidence ratio must be positive, got {0}")]
    NonPositiveRatio(f64),

    #[error("raw prevalence for {window} is zero but the target is {target}")]
    ZeroRawPrevalence { window: &'static str, target: f64 },

    #[error("negative prevalent deaths ({0}): inconsistent incidence, prevalence and deaths")]
    NegativePrevalentDeaths(f64),

    #[error("1-year prevalence {prevalence_1y} exceeds incidence {incidence}")]
    PrevalenceExceedsIncidence { prevalence_1y: f64, incidence: f64 },

    #[error("missing disability weight for ({}, {})", .0.as_str(), .1.as_str())]
    MissingWeight(Population, StageClass),

    #[error("unresolved resource {0:?}")]
    UnresolvedResource(String),

    #[error("regimen shares cover {0} of the drug cost; must be in (0, 1]")]
    InvalidCoveredShare(f64),

    #[error("no drug cost for {0}: neither a per-patient value nor regimen rows")]
    MissingDrugCost(CellKey),

    #[error("{what} sums to {sum}, expected 1")]
    MixNotNormalized { what: String, sum: f64 },

    #[error("empty draw set")]
    EmptyDraws,

    #[error("percentile {0} outside (0, 100)")]
    InvalidPercentile(f64),
}

pub type ModelResult<T> = Result<T, ModelError>;
