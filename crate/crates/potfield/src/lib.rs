//! File formats, evaluation protocols and the command line for
//! potential-field trajectory prediction. Numerics live in `potfield_core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod ingest;
pub mod io;
pub mod protocol;
pub mod render;
pub mod scene;
pub mod synthetic;

pub use config::RunConfig;
pub use error::{Error, Result};
