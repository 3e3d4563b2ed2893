//! Command-line front end: training runs, embedding export, evaluation protocols, synthetic
//! data and model checkpoints.

pub mod args;
pub mod checkpoint;
pub mod commands;

use gaussembed::error::ErrorClass;
use thiserror::Error;

pub use checkpoint::{load_model, save_model, ModelMetadata};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const DATA: u8 = 2;
    pub const NUMERIC: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gaussembed::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => exit::USAGE,
                ErrorClass::Data => exit::DATA,
                ErrorClass::Numeric => exit::NUMERIC,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
