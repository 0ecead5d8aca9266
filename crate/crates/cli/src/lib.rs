//! Library half of the `tone-audit` binary: argument types, command
//! implementations, and report writers. The binary in `main.rs` only parses
//! arguments and maps errors to exit codes; everything testable lives here.

pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

/// Top-level failure classes with a stable exit-code contract:
/// validation failures exit 1, I/O failures exit 2.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) => 1,
            AppError::Io(_) => 2,
        }
    }
}

impl From<tone_audit::corpus::CorpusError> for AppError {
    fn from(e: tone_audit::corpus::CorpusError) -> Self {
        match e {
            tone_audit::corpus::CorpusError::Io { .. } => AppError::Io(e.to_string()),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<tone_audit::skinmask::MaskError> for AppError {
    fn from(e: tone_audit::skinmask::MaskError) -> Self {
        match e {
            tone_audit::skinmask::MaskError::Io { .. }
            | tone_audit::skinmask::MaskError::Decode { .. } => AppError::Io(e.to_string()),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<tone_audit::tonemetrics::ToneError> for AppError {
    fn from(e: tone_audit::tonemetrics::ToneError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<tone_audit::aggregate::AggregateError> for AppError {
    fn from(e: tone_audit::aggregate::AggregateError) -> Self {
        AppError::Validation(e.to_string())
    }
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> AppError {
    AppError::Io(format!("{}: {e}", path.display()))
}
