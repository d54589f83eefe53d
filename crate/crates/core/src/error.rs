use thiserror::Error;

use crate::Point;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FracError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("kernel evaluated at the singular point y = 0")]
    Singularity,
    #[error("point ({}, {}) is not interior to the domain", .0[0], .0[1])]
    NotInterior(Point),
    #[error("{op} does not support the {variant} domain")]
    UnsupportedDomain { op: &'static str, variant: &'static str },
    #[error("far-field integral diverges: growth exponent {growth} is not below {limit}")]
    Divergence { growth: f64, limit: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0} requires a bounded domain")]
    Unbounded(&'static str),
    #[error("{failed} of {paths} walks exceeded {max_steps} steps")]
    Reliability {
        failed: u64,
        paths: u64,
        max_steps: usize,
    },
    #[error("insufficient data: {usable} usable samples, need at least {needed}")]
    InsufficientData { usable: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, FracError>;
