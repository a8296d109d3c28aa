use std::io;
use std::path::PathBuf;

use audiology_core::{DomainError, Violation};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{} already exists", .0.display())]
    AlreadyExists(PathBuf),
    #[error("{} not found", .0.display())]
    NotFound(PathBuf),
    #[error("{} is not a hearing test store", .0.display())]
    NotAStore(PathBuf),
    /// Wrong key and damaged contents are deliberately reported alike.
    #[error("authentication failed: wrong key or damaged store")]
    AuthenticationFailure,
    #[error("store schema version {found} is newer than supported version {supported}")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("store {} is in use by another process", .0.display())]
    Locked(PathBuf),
    #[error("store is closed")]
    Closed,
    #[error("search needs at least one criterion")]
    EmptyCriteria,
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("line {line}: {message}")]
    Transfer { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::AlreadyExists(_) => "already-exists",
            StoreError::NotFound(_) => "not-found",
            StoreError::NotAStore(_) => "not-a-store",
            StoreError::AuthenticationFailure => "authentication-failure",
            StoreError::UnsupportedVersion { .. } => "unsupported-version",
            StoreError::Locked(_) => "store-locked",
            StoreError::Closed => "store-closed",
            StoreError::EmptyCriteria => "validation-failed",
            StoreError::Domain(e) => e.code(),
            StoreError::Transfer { .. } => "malformed-record",
            StoreError::Io(_) => "io-error",
        }
    }

    /// Validation violations carried by the error, if any.
    pub fn violations(&self) -> &[Violation] {
        match self {
            StoreError::Domain(DomainError::Invalid(v)) => v,
            _ => &[],
        }
    }
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;
