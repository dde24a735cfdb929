use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("unknown element symbol {symbol:?}")]
    UnknownElement { symbol: String },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid bin profile: {0}")]
    InvalidProfile(String),

    #[error("atoms {i} and {j} overlap: distance {distance:.4} Å < 0.5 Å")]
    OverlappingAtoms { i: usize, j: usize, distance: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("no boundary atoms: structure has no bonds crossing the periodic boundary")]
    NoBoundaryAtoms,

    #[error("bond graph is disconnected when periodic images are identified")]
    DisconnectedGraph,

    #[error("kappa extraction failed: {0}")]
    KappaExtraction(String),

    #[error("spectral analysis failed: {0}")]
    Spectral(String),

    #[error("invalid attention stack: {0}")]
    Attention(String),

    #[error("regression error: {0}")]
    Regression(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for this error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::UnknownElement { .. } => "unknown-element",
            Error::InvalidStructure(_) => "invalid-structure",
            Error::InvalidTrajectory(_) => "invalid-trajectory",
            Error::InvalidProfile(_) => "invalid-profile",
            Error::OverlappingAtoms { .. } => "overlapping-atoms",
            Error::InvalidGraph(_) => "invalid-graph",
            Error::NoBoundaryAtoms => "no-boundary-atoms",
            Error::DisconnectedGraph => "disconnected-graph",
            Error::KappaExtraction(_) => "kappa-extraction",
            Error::Spectral(_) => "spectral",
            Error::Attention(_) => "attention",
            Error::Regression(_) => "regression",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Io { .. } => "io",
        }
    }
}
