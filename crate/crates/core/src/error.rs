use thiserror::Error;

use crate::grid::Side;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by grid, symbol, operator and experiment routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field is on the {found:?} side, expected {expected:?}")]
    SideMismatch { expected: Side, found: Side },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("region contains no lattice points")]
    EmptyRegion,

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("derivative order {order} exceeds the symbol's smoothness order {max}")]
    DerivativeOrder { order: usize, max: usize },

    #[error("symbol is singular at the evaluation point {0:?}")]
    SingularPoint(Vec<f64>),

    #[error("quadrature failure for alpha={alpha:?}, r={r}: {reason}")]
    Quadrature { alpha: Vec<usize>, r: f64, reason: String },

    #[error(
        "frequency support up to |xi|={needed} exceeds the lattice range {available}; \
         use N >= {required_n} at L={l} or L <= {required_l} at N={n}"
    )]
    FrequencyRange { needed: f64, available: f64, required_n: usize, l: f64, required_l: f64, n: usize },

    #[error("frequency {lambda} violates the Nyquist guard {limit}")]
    Nyquist { lambda: f64, limit: f64 },

    #[error("profile support leaves the admissible box: {0}")]
    Support(String),

    #[error("operator side {side} exceeds the materialization guard {max}")]
    SizeGuard { side: usize, max: usize },

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate})")]
    NotConverged { estimate: f64, iterations: usize },

    #[error("table error: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors that signal a numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::Svd(_) | Error::NotConverged { .. })
    }
}
