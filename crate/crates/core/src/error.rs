use thiserror::Error;

/// Errors produced by the spectral, algebraic and stochastic routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid resolution must be even and at least 4, got {0}")]
    InvalidResolution(usize),

    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: usize, right: usize },

    #[error("grid data has length {got}, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("inverse Laplacian of a field with nonzero mean {0:e}")]
    NonZeroMean(f64),

    #[error("wave index (0, 0) is not a valid basis direction")]
    ZeroWaveIndex,

    #[error("wave index ({k1}, {k2}) does not fit a grid of size {n}")]
    ModeOutOfBand { k1: i64, k2: i64, n: usize },

    #[error("basis field not geodesic: |grad_X X| = {0:e}")]
    NotGeodesic(f64),

    #[error("field has mode ({k1}, {k2}) outside the basis span |k|_1 <= {m}; sum incomplete")]
    IncompleteBasis { k1: i64, k2: i64, m: i64 },

    #[error("blow-up or instability at t = {0}")]
    Instability(f64),

    #[error("one-form is not closed: residual {0:e}")]
    NotClosed(f64),

    #[error("test direction does not vanish at the endpoints (|v(0)| = {start:e}, |v(tau)| = {end:e})")]
    EndpointsNotZero { start: f64, end: f64 },

    #[error("non-finite position for particle {particle} at step {step}")]
    NonFinitePosition { particle: usize, step: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("snapshot line {line}: {msg}")]
    Snapshot { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
