//! Plumbing for the `pdmp` experiment runner: configuration files, model
//! selection, CSV formats and ordered parallel Monte Carlo.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod model;
pub mod parallel;
pub mod table;

pub use config::Config;
pub use error::{CliError, Result};
pub use model::{Model, ModelKind};
pub use table::Table;
