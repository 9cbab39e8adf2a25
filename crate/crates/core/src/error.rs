use thiserror::Error;

/// Errors raised by the library. Indices carried by variants are 1-based
/// term positions, matching the way series terms are usually numbered.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("symbol `{name}` has invalid value {value}")]
    BadSymbolValue { name: String, value: f64 },
    #[error("exponents not strictly increasing at term {0}")]
    NonIncreasingExponents(usize),
    #[error("exponent of term {0} repeats an earlier exponent")]
    DuplicateExponent(usize),
    #[error("coefficient of term {0} is not finite")]
    NonFiniteCoefficient(usize),
    #[error("sigma must be positive, got {0}")]
    NonpositiveSigma(f64),
    #[error("tail majorant needs coeff_bound >= 0 and min_gap > 0")]
    BadTail,
    #[error("division by zero")]
    DivisionByZero,
    #[error("empty input")]
    EmptyInput,
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("series exponents differ at term {0}")]
    ExponentMismatch(usize),
    #[error("coefficient moduli differ at term {0}")]
    ModulusMismatch(usize),
    #[error("coefficient support differs at term {0}")]
    SupportMismatch(usize),
    #[error("phase system is inconsistent at tolerance {tol}: residual {residual}")]
    Indeterminate { tol: f64, residual: f64 },
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("boundary sample at {sigma}+{t}i is within {delta} of a zero")]
    BoundaryTooClose { sigma: f64, t: f64, delta: f64 },
    #[error("argument subdivision did not converge on a rectangle side")]
    NonconvergentSubdivision,
    #[error("f - v vanishes identically")]
    DegenerateTarget,
    #[error("bad index {0}: ordinary series indices must be distinct and >= 1")]
    BadIndex(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
