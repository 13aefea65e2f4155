use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension { what: &'static str, expected: usize, found: usize },

    #[error("component {component} is not antisymmetric at entry ({row}, {col})")]
    NotAntisymmetric { component: usize, row: usize, col: usize },

    #[error("invalid bundle datum: {0}")]
    InvalidDatum(String),

    #[error("group element is not a lattice element")]
    NotLattice,

    #[error("{which} does not square to -identity (residual {residual:e})")]
    NotComplexStructure { which: &'static str, residual: f64 },

    #[error("Riemann relation violated (residual {residual:e})")]
    RiemannViolated { residual: f64 },

    #[error("operation requires fibre dimension d = 1, got d = {d}")]
    RequiresFibreDimensionOne { d: usize },

    #[error("unsupported base dimension m = {m} for this solver")]
    UnsupportedBaseDimension { m: usize },

    #[error("alternating form is degenerate")]
    Degenerate,

    #[error("real-structure data invalid: {0}")]
    InvalidRealData(String),

    #[error("eigen-splitting violates {condition} (max deviation {deviation})")]
    InconsistentSplit { condition: &'static str, deviation: String },

    #[error("no lattice vector solves the involution-square condition: {0}")]
    GammaUnsolvable(String),

    #[error("eigenspace dimensions differ: +1 has {plus}, -1 has {minus}")]
    EigenDimensionMismatch { plus: usize, minus: usize },

    #[error("{0} is not invertible")]
    NotInvertible(&'static str),

    #[error("{which} is not antiholomorphic for the given complex structure (residual {residual:e})")]
    NotAntiholomorphic { which: &'static str, residual: f64 },

    #[error("inconsistent conjugation data: {0}")]
    InconsistentConjugation(String),

    #[error("solution set is empty")]
    EmptySolutionSet,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
