// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time series `{id}`: {reason}")]
    InvalidSeries { id: String, reason: String },

    #[error("series `{id}` has {len} observations; need at least {needed} (2 x min_segment)")]
    SeriesTooShort { id: String, len: usize, needed: usize },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid change-point set: {0}")]
    InvalidChangePoints(String),

    #[error("variance segment [{start}, {end}) has fewer than 2 observations")]
    DegenerateSegment { start: usize, end: usize },

    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    #[error("domain mismatch: H = {left} vs H = {right}")]
    DomainMismatch { left: f64, right: f64 },

    #[error("step function `{label}` has zero norm")]
    ZeroFunction { label: String },

    #[error("change-point set is empty; set distance undefined")]
    EmptySet,

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid coordinate for station `{id}`: lat {lat}, lon {lon}")]
    InvalidCoordinate { id: String, lat: f64, lon: f64 },

    #[error("duplicate station id `{0}`")]
    DuplicateStation(String),

    #[error("cluster count k = {k} out of range 1..={n}")]
    BadK { k: usize, n: usize },

    #[error("affinity row `{label}` sums to zero; spectral embedding undefined")]
    DisconnectedDegenerate { label: String },

    #[error("perturbation window [{t0}, {t0}+{delta}) outside domain of length {len}")]
    WindowOutOfRange { t0: usize, delta: usize, len: usize },

    #[error("unparseable cell at row {row}, column `{column}`: {value:?}")]
    UnparseableCell { row: usize, column: String, value: String },

    #[error("column `{0}` has no observations")]
    AllMissingColumn(String),

    #[error("id mismatch: {0}")]
    IdMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Errors caused by malformed or inconsistent input files, as opposed to
    /// numerical or configuration failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
                | Error::UnparseableCell { .. }
                | Error::AllMissingColumn(_)
                | Error::IdMismatch(_)
                | Error::InvalidCoordinate { .. }
                | Error::DuplicateStation(_)
                | Error::InvalidSeries { .. }
        )
    }
}
