//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by the symbolic layer (charts, polynomials, fields).
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CalcError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("chart mismatch: `{0}` vs `{1}`")]
    ChartMismatch(String, String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degree error: {0}")]
    DegreeError(String),

    #[error("total degree {degree} exceeds the chart cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },

    #[error("invalid chart: {0}")]
    InvalidChart(String),
}

/// Errors raised by the algebraic layer (Lie algebra / bialgebra data).
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("structure constants are not antisymmetric at ({i},{j},{k})")]
    NotAntisymmetric { i: usize, j: usize, k: usize },

    #[error("invalid bialgebra: {0}")]
    InvalidBialgebra(String),
}

/// Errors raised by the dual-group layer.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("left-translation frame is not polynomially invertible: {0}")]
    NonInvertibleFrame(String),

    #[error("no multiplicative bivector with the required linearization at degree bound {0}")]
    NoSolutionAtDegree(u32),

    #[error("derived bivector fails the Jacobi (Schouten) condition: {0}")]
    DerivedBivectorNotPoisson(String),

    #[error("group model is inconsistent: {0}")]
    InvalidGroup(String),

    #[error(transparent)]
    Calc(#[from] CalcError),

    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Errors raised by reconstruction and analysis of momentum data.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReconstructError {
    #[error("distribution is not involutive: {0}")]
    NotInvolutive(String),

    #[error("coframe matrix is singular along the path near {0:?}")]
    FrameSingular(Vec<f64>),

    #[error("point {0:?} lies outside the chart box")]
    OutOfDomain(Vec<f64>),

    #[error("expected a closed form for `{0}` but d of it is nonzero")]
    NotClosed(String),

    #[error("cobracket is nonzero; the dual group is not abelian")]
    NotAbelian,

    #[error("expected a constant but found a polynomial of positive degree: {0}")]
    NotConstant(String),

    #[error("scenario data does not model the Heisenberg dual: {0}")]
    NotHeisenberg(String),

    #[error(transparent)]
    Calc(#[from] CalcError),

    #[error(transparent)]
    Group(#[from] GroupError),
}
