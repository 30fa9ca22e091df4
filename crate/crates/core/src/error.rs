use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: n = {left} vs n = {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("form is not homogeneous of a single degree")]
    NonHomogeneous,

    #[error("invalid coefficient {input:?} at position {position}: {message}")]
    Coefficient {
        input: String,
        position: usize,
        message: String,
    },

    #[error("model file parse error at line {line}, column {column}: {message}")]
    ModelParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("d^2 != 0 on generator {generator}: residual {residual}")]
    NotComplex { generator: String, residual: String },

    #[error("model is not unimodular: d does not vanish on {monomial}")]
    NotUnimodular { monomial: String },

    #[error("theta is not dbar-closed: dbar(theta) = {component}")]
    NotDbarClosed { component: String },

    #[error("real one-form is not closed: d(theta) = {component}")]
    NotClosed { component: String },

    #[error("theta is dbar-exact; H^0 is isomorphic to the untwisted group (dim {dim})")]
    PreconditionExact { dim: usize },

    #[error("numerically indeterminate: spectral gap ratio {gap:.3e} below 10")]
    Indeterminate { gap: f64 },

    #[error("operation requires a flat (abelian) model; {0}")]
    NotFlat(String),

    #[error("band overflow: cutoff {cutoff} is smaller than required band {required}")]
    BandOverflow { cutoff: usize, required: usize },

    #[error("kernel is empty at cutoff {cutoff} (smallest singular value {sigma_min:.3e}); identity is vacuous")]
    Vacuous { cutoff: usize, sigma_min: f64 },

    #[error("nowhere-vanishing certificate failed: lower bound C1 = {c1:.6}")]
    CertificateFailed { c1: f64 },

    #[error("complex dimension {0} is too small for this operation")]
    DimensionTooSmall(usize),

    #[error("hermitian form is not positive: {0}")]
    NotPositive(String),

    #[error("s-table is not symmetric at ({p}, {q})")]
    AsymmetricSTable { p: usize, q: usize },

    #[error("fixed-point datum s = {s} outside [0, {n}]")]
    FixedPointOutOfRange { s: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
