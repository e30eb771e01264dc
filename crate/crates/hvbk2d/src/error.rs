//! Crate-wide error type.

use crate::spectral::Representation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("expected field in {expected:?} representation, found {found:?}")]
    Representation {
        expected: Representation,
        found: Representation,
    },

    #[error("grid mismatch: {left_n}^2 (L = {left_len}) vs {right_n}^2 (L = {right_len})")]
    GridMismatch {
        left_n: usize,
        left_len: f64,
        right_n: usize,
        right_len: f64,
    },

    #[error("mean mode is {fraction:.3e} of the field norm, beyond the zero-mean gauge tolerance {tol:.1e}")]
    NonzeroMean { fraction: f64, tol: f64 },

    #[error("vorticity mean mode is {fraction:.3e} of its norm: no periodic velocity field exists")]
    NonzeroMeanVorticity { fraction: f64 },

    #[error("velocity divergence is {fraction:.3e} of the field norm, beyond {tol:.1e}")]
    NotDivergenceFree { fraction: f64, tol: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("integration blew up at t = {t}: {what}")]
    Blowup { t: f64, what: String },

    #[error("|omega| mass outside the concentration zone is {spill:.3e} of the total, beyond {tol:.1e}")]
    NotConcentrated { spill: f64, tol: f64 },

    #[error("config key '{key}': {reason}")]
    Config { key: String, reason: String },

    #[error("unknown initial-condition kind '{kind}'; registered kinds: {registered}")]
    UnknownInitKind { kind: String, registered: String },

    #[error("not an HVBK checkpoint (bad magic bytes)")]
    CheckpointBadMagic,

    #[error("checkpoint version {found} unsupported (expected {expected})")]
    CheckpointVersion { found: u32, expected: u32 },

    #[error("checkpoint truncated: expected {expected} more bytes, found {found}")]
    CheckpointTruncated { expected: usize, found: usize },

    #[error("checkpoint header corrupt: {0}")]
    CheckpointHeader(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
