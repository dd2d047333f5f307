//! SMD bilevel test problems, a construction kit for composing new ones, and
//! a nested evolutionary baseline solver.
//!
//! ```
//! use smd_core::{instantiate, Dims, ProblemId};
//!
//! let inst = instantiate(ProblemId::Smd1, Dims::new(1, 2, 1)).unwrap();
//! let opt = inst.known_optimum().unwrap();
//! let out = inst.evaluate(&opt.x).unwrap();
//! assert_eq!((out.upper_objective, out.lower_objective), (0.0, 0.0));
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod grid;
pub mod kit;
pub mod problem;
pub mod smd;
pub mod solver;
pub mod types;

pub use error::{DimensionError, EvalError, GridError, InstantiateError, KitError, SolverError};
pub use grid::{contour_grid, GridAxis, GridSample, GridSpec};
pub use kit::{
    apply_interaction, compose, multi_global_lower, stackelberg_optimum, stackelberg_problem, BlockArgs, Blocks,
    ComponentFunction, InteractionMode, StackelbergOptimum, StackelbergParams, Terms,
};
pub use problem::{Components, Interaction, OptimumRecord, ProblemInstance, Properties, PsiReference, PsiSet};
pub use smd::{instantiate, ProblemId};
pub use solver::{solve, BoundHandling, GAConfig, Individual, OmegaEta, SolveResult, TerminatedBy};
pub use types::{
    clamp_in_place, clamp_to_bounds, split, total_violation, BilevelVector, Bounds, ConstraintSubset, Dims,
    EvalOutcome, Interval, Level, EPS_OPEN,
};
