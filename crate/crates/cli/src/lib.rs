//! Command-line front end: tree-file I/O, configuration, run reports,
//! comparison tables and SVG plots.
//!
//! Exit codes: 0 success, 2 malformed input, 3 invalid configuration or
//! infeasible request, 4 unwritable output.

pub mod commands;
pub mod error;
pub mod output;
pub mod report;
pub mod svg;
pub mod treefile;

pub use commands::run;
pub use error::{CliError, CliResult};
