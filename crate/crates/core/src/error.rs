use thiserror::Error;

use crate::measures::{Point, Topology};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("side length must be at least {min}, got {n}")]
    SideTooSmall { n: usize, min: usize },

    #[error("expected a {expected}x{expected} table, got {rows}x{cols}")]
    ShapeMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("non-finite value {value} at ({a}, {b})")]
    NonFinite { a: usize, b: usize, value: f64 },

    #[error("point ({}, {}) lies outside the {n}x{n} domain", .point.0, .point.1)]
    OutOfRange { point: Point, n: usize },

    #[error("point ({}, {}) listed more than once", .0.0, .0.1)]
    DuplicatePoint(Point),

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("point sets differ in size ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },

    #[error("operands live on different domains")]
    DomainMismatch,

    #[error("expected {expected:?} topology, got {found:?}")]
    WrongTopology { expected: Topology, found: Topology },

    #[error("not a probability measure: {0}")]
    NotProbability(String),

    #[error("total mass {total:e} is not zero")]
    NonZeroMass { total: f64 },

    #[error("positive and negative parts are unbalanced (relative gap {gap:e})")]
    Unbalanced { gap: f64 },

    #[error("problem too large: {0}")]
    SizeGuard(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("imaginary residue {0:e} exceeds tolerance")]
    ImaginaryResidue(f64),

    #[error("field must vanish at the base point, found {0:e}")]
    BasePointNonZero(f64),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures inside a numerical solver as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Solver(_) | Error::ImaginaryResidue(_) | Error::Unbalanced { .. }
        )
    }
}
