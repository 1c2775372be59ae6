use thiserror::Error;

use crate::formulation::Formulation;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("simplex iteration limit reached after {0} iterations")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("deadline passed during simplex")]
    TimeLimit,
    #[error("column index {0} out of range")]
    BadColumn(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("cut references {var} which the {formulation:?} model does not own")]
    ModelMismatch { var: String, formulation: Formulation },
    #[error("invalid cut specification: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Cut(#[from] CutError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("enumeration guard exceeded: {0}")]
    TooLarge(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}
