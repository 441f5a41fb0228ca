//! Command-line front end: CSV ingestion, configuration, commands and reports.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod report;

pub use commands::{BenchConfig, CountOpsConfig, DataSource, RunConfig};
pub use error::CliError;
pub use ingest::{ingest_csv, ColumnSpec, Dataset, HeaderMode};
pub use report::{Format, Report};
