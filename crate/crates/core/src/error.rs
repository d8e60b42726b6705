use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error: {0}")]
    Stream(#[from] std::io::Error),

    /// Malformed `.mcube` container or curve file.
    #[error("format error: {0}")]
    Format(String),

    /// Malformed or incompatible model file.
    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("wavelength {wavelength} nm is outside the curve support [{lo}, {hi}] nm")]
    OutOfSupport { wavelength: f64, lo: f64, hi: f64 },

    #[error("pixel ({row}, {col}) out of range for {height}x{width} image")]
    Bounds {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid architecture: {0}")]
    Spec(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate camera response: channel {channel} sums to zero on the grid")]
    DegenerateResponse { channel: &'static str },

    #[error("cube {cube}: requested {requested} samples but only {available} unmasked pixels")]
    Sampling {
        cube: String,
        requested: usize,
        available: usize,
    },

    #[error("training diverged at epoch {epoch}, batch {batch} (loss = {loss})")]
    Divergence {
        epoch: usize,
        batch: usize,
        loss: f64,
    },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("degenerate chromophore basis: {0}")]
    Basis(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
