//! Config-driven front end for `krein-core`.
//!
//! A run reads one JSON document naming a system, an analysis, output
//! settings and optional tolerance overrides. Results are written as CSV
//! tables (one file per table plus `meta.json`) or as a single `result.json`.

pub mod config;
pub mod error;
pub mod run;
pub mod table;

pub use config::{AnalysisConfig, Format, OutputConfig, RunConfig, SystemConfig};
pub use error::CliError;
pub use run::{run, schema};
pub use table::{round15, RunOutput, Table};
