//! Experiment runner, file formats and command-line front end for the
//! quantized-network generalization laboratory.

pub mod config;
pub mod error;
pub mod exec;
pub mod formats;
pub mod instance;
pub mod studies;

pub use error::{LabError, Result};
pub use exec::Threaded;
