//! Nested bilevel evolutionary baseline.

mod config;
mod nested;
mod operators;

pub use config::{AlphaMode, BoundHandling, GAConfig, OmegaEta};
pub use nested::{lower_optimize, solve, solve_traced, LowerResult, SolveResult, TerminatedBy, TraceRow};
pub use operators::{alpha, compare, compare_keys, pcx, poly_mutate, variances, Individual, PCX_FLOOR, VAR_FLOOR};
