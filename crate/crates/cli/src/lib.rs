//! Runner behind the `ssmt` binary: data application, Monte-Carlo
//! simulation, figure presets and benchmarks.

pub mod config;
pub mod error;
pub mod input;
pub mod output;
pub mod presets;
pub mod run;
pub mod svg;

pub use config::{Cli, Command, RunConfig};
pub use error::{CliError, CliResult};
pub use presets::FigureId;
pub use run::{run, Report};
