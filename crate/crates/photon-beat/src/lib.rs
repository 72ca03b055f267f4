//! File formats, configuration, parallel generation and the analysis chain
//! behind the `photon-beat` command-line tool.

pub mod config;
pub mod curves;
pub mod error;
pub mod io;
pub mod oracle;
pub mod parallel;
pub mod pipeline;
pub mod quantity;

pub use error::{CliError, CliResult};
