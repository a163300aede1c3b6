//! File formats, configuration and run manifests around [`dial_core`], plus
//! the error categories the `dial` command reports.

pub mod config;
pub mod error;
pub mod instance;
pub mod manifest;
pub mod poses;
pub mod tensor;
pub mod text;

pub use config::Config;
pub use error::{Category, CliError};
pub use manifest::Manifest;
