//! Campaign runner, summary statistics, result files and reference data for
//! the SMD suite.

pub mod campaign;
pub mod config;
pub mod error;
pub mod io;
pub mod paper;
pub mod preset;
pub mod stats;

pub use campaign::{accuracy, run_suite, run_suite_traced, RunRecord, RunSpec, Termination, SOLVED_THRESHOLD};
pub use error::BenchError;
pub use io::{export_records, import_records, Format, SCHEMA_VERSION};
pub use preset::DimPreset;
pub use smd_core;
pub use stats::{summarize, Marker, Spread, SummaryRow, SummaryTable};
