use std::path::PathBuf;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shear profile is not strictly monotone: u'({y}) = {slope}")]
    NonMonotone { y: f64, slope: f64 },

    #[error("ledger constraint `{name}` violated: {detail}")]
    ConstraintViolation { name: &'static str, detail: String },

    #[error("banded solve failed: {0}")]
    SolveFailure(String),

    #[error("solution reached the truncation boundary at t = {t} (edge/max ratio {ratio:e})")]
    BoundaryBreach { t: f64, ratio: f64 },

    #[error("non-finite value in state at t = {t}")]
    NonFinite { t: f64 },

    #[error("under-resolved configuration: {0}")]
    Resolution(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("spectrum frequency {max_eta} exceeds grid Nyquist limit {nyquist}")]
    AliasRisk { max_eta: f64, nyquist: f64 },

    #[error("insufficient decay: ratio {ratio} over the fit window")]
    InsufficientDecay { ratio: f64 },

    #[error("fit needs at least {needed} points, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("threshold not reached for nu = {nu} before t = {horizon}; use a longer horizon")]
    ThresholdNotReached { nu: f64, horizon: f64 },

    #[error("viscosity list spans {decades} decades, at least 2 are required")]
    InsufficientSpan { decades: f64 },

    #[error("per-mode records do not share a time grid: {0}")]
    MismatchedGrids(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonMonotone { .. } => "NonMonotone",
            Error::ConstraintViolation { .. } => "ConstraintViolation",
            Error::SolveFailure(_) => "SolveFailure",
            Error::BoundaryBreach { .. } => "BoundaryBreach",
            Error::NonFinite { .. } => "NonFinite",
            Error::Resolution(_) => "Resolution",
            Error::Invalid(_) => "Invalid",
            Error::AliasRisk { .. } => "AliasRisk",
            Error::InsufficientDecay { .. } => "InsufficientDecay",
            Error::InsufficientPoints { .. } => "InsufficientPoints",
            Error::ThresholdNotReached { .. } => "ThresholdNotReached",
            Error::InsufficientSpan { .. } => "InsufficientSpan",
            Error::MismatchedGrids(_) => "MismatchedGrids",
            Error::Io { .. } => "Io",
            Error::Config { .. } => "Config",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
