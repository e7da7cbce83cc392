use thiserror::Error;

use crate::exact::Rational;

/// Every failure the engine can report. All of them are exact conditions;
/// nothing is ever approximated to make a computation succeed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(
        "interpolation check failed at x = {x}: expected {expected}, interpolant gives {actual}"
    )]
    VerificationFailed {
        x: Rational,
        expected: Rational,
        actual: Rational,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("affine function is identically zero after specialization")]
    ConstantZero,

    #[error("divisor class lives on `{found}` but `{expected}` was required")]
    LatticeMismatch { expected: String, found: String },

    #[error("class is not pseudo-effective: {0}")]
    NotPseudoEffective(String),

    #[error("cone threshold is unbounded")]
    Unbounded,

    #[error("pseudo-effective boundary at u = {u} is irrational: {detail}")]
    IrrationalBoundary { u: Rational, detail: String },

    #[error("breakpoint refinement exceeded depth {depth} on [{lo}, {hi}]")]
    BreakpointRefinementExceeded {
        lo: Rational,
        hi: Rational,
        depth: u32,
    },

    #[error("binary form is identically zero")]
    IdenticallyZero,

    #[error("factorization check failed: {0}")]
    FactorizationMismatch(String),

    #[error("table `{table}` failed validation: {detail}")]
    TableViolation { table: String, detail: String },

    #[error("malformed piecewise polynomial: {0}")]
    MalformedPiecewise(String),

    #[error("chamber sweep failed: {0}")]
    Sweep(String),
}

pub type Result<T> = std::result::Result<T, Error>;
