//! Command-line front end for `largeparam`: run configurations, relative
//! error tables for the two example problems, single-problem reports and
//! their text formats.

pub mod config;
pub mod error;
pub mod format;
pub mod registry;
pub mod report;
pub mod table;

pub use config::{Case, Format, Kind, Method, Preset, RunConfig};
pub use error::CliError;
pub use report::{run_solve, SolveReport};
pub use table::{run_table, CellMethod, Outcome, Row, Table};
