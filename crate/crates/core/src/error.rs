use thiserror::Error;

use crate::smd::ProblemId;
use crate::types::Level;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimensionError {
    #[error("{vector} vector has length {found}, expected {expected}")]
    Length {
        vector: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("the {level} level has no variables")]
    EmptyLevel { level: Level },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("{id}: {rule}")]
    InvalidDims { id: ProblemId, rule: &'static str },
    #[error(transparent)]
    Dimension(#[from] DimensionError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("{level} variable {index} = {value} lies outside its domain")]
    OutOfDomain { level: Level, index: usize, value: f64 },
    #[error("no lower-level reference is available for this instance")]
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("axis index {index} is out of range for {len} variables")]
    AxisOutOfRange { index: usize, len: usize },
    #[error("the two grid axes must differ")]
    SameAxis,
    #[error(transparent)]
    Dimension(#[from] DimensionError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KitError {
    #[error("component {component} reads a block it is not allowed to read")]
    Arity { component: &'static str },
    #[error("multi-global lower level needs at least 2 xl1 components, got {0}")]
    TooFewComponents(usize),
    #[error("bounds length {found} does not match {expected} {level} variables")]
    Bounds {
        level: Level,
        expected: usize,
        found: usize,
    },
    #[error("invalid Stackelberg parameter {name}: must be {requirement}")]
    Parameter {
        name: &'static str,
        requirement: &'static str,
    },
    #[error(transparent)]
    Dimension(#[from] DimensionError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(&'static str),
    #[error("individual has not been evaluated at the {0} level")]
    Unevaluated(Level),
    #[error("pcx needs parents of equal dimension")]
    ParentDimension,
    #[error("upper block has length {found}, expected {expected}")]
    UpperLength { expected: usize, found: usize },
}
