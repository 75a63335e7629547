use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("parameters are not special-unitary: |alpha|^2+|beta|^2 = {norm_sq}")]
    NotUnitary { norm_sq: f64 },

    #[error("degenerate: whole sphere")]
    WholeSphere,

    #[error("regions {first} and {second} overlap (intersection measure {measure:e})")]
    Overlap {
        first: usize,
        second: usize,
        measure: f64,
    },

    #[error("empty region")]
    EmptyRegion,

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("norm must be 1, got {norm}")]
    NotNormalized { norm: f64 },

    #[error("non-finite integrand at node s={s}, theta={theta}")]
    NonFiniteNode { s: f64, theta: f64 },

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("eigenvalue {value:e} below round-off floor; quadrature is broken")]
    NegativeEigenvalue { value: f64 },

    #[error("schema: {0}")]
    Schema(String),
}

pub type Result<T> = core::result::Result<T, Error>;
