//! Crate-wide error type.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input data contains NaN/Inf or violates a basic shape requirement.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Every pairwise distance in the point cloud is below the duplicate
    /// tolerance, so no secant can be formed.
    #[error("all points coincide within the duplicate tolerance")]
    AllPointsCoincident,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A delay window [t, t+ell) does not fit inside the time axis.
    #[error("window out of range: start {t} with {ell} delay blocks exceeds {t_len} time steps")]
    WindowOutOfRange { t: usize, ell: usize, t_len: usize },

    /// The PDE integrator produced a non-finite state.
    #[error("numerical blow-up at step {step}")]
    NumericalBlowup { step: usize },

    #[error("parse error in {path} (line {line}): {msg}")]
    ParseError {
        path: String,
        line: usize,
        msg: String,
    },

    /// A (time, site) cell required by the cube grid is absent.
    #[error("incomplete grid: missing entry for time {time:?}, site {site:?}")]
    IncompleteGrid { time: String, site: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("channel mismatch: expected {expected}, file has {found}")]
    ChannelMismatch { expected: usize, found: usize },

    /// Signal shorter than a single analysis window after decimation.
    #[error("input too short: need at least {needed} samples after decimation, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
