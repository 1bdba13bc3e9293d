//! Command-line front end: dataset builders, IDX parsing, manifests and the
//! subcommand dispatcher used by the `svarm` binary.

pub mod datasets;
pub mod error;
pub mod idx;
pub mod inspect;
pub mod manifest;
pub mod run;

pub use error::{CliError, Result};
pub use run::run;
