//! Library side of the `netplace` command: system-file parsing, report
//! construction and the subcommand implementations.

pub mod commands;
pub mod error;
pub mod report;
pub mod system;

pub use commands::{
    backup_cmd, check, metric_cmd, place_cmd, Input, MetricOverrides, PlaceOptions,
};
pub use error::CliError;
pub use report::Report;
pub use system::{Layout, MetricBlock, MetricKind, ParseError, SystemFile};
