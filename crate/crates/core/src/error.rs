use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A single finding from [`crate::model::Instance::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid instance: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown resident {0}")]
    UnknownResident(String),
    #[error("unknown hospital {0}")]
    UnknownHospital(String),
    #[error("no assign line for {0}")]
    MissingResident(String),
    #[error("unacceptable assignment {0}")]
    Unacceptable(String),
    #[error("couple inconsistency in {0}")]
    CoupleInconsistency(String),
    #[error("capacity exceeded at {0}")]
    CapacityExceeded(String),
    #[error("matching does not fit the instance")]
    MatchingShape,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("brute-force oracle limited to {limit} residents, instance has {found}")]
    OracleLimit { limit: usize, found: usize },
    #[error("list of length {0} exceeds the solver limit of 62")]
    ListTooLong(usize),
    #[error("instance is not in the required class: {0}")]
    WrongClass(String),
    #[error("structure violation at {agent}: {reason}")]
    Structure { agent: String, reason: String },
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error("graph is not cubic: {0}")]
    NotCubic(String),
    #[error("not a vertex cover of size {0}")]
    NotACover(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum IpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("missing value for {0}")]
    MissingVariable(String),
    #[error("value of {0} must be 0 or 1")]
    NotBinary(String),
    #[error("{0} violated")]
    Violated(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}
