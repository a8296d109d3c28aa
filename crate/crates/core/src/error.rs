use thiserror::Error;

use crate::aggregate::Category;
use crate::model::ExamKey;
use crate::validate::Violation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("patient id must not be empty")]
    EmptyPatientId,
    #[error("invalid exam date {0:?}, expected YYYY-MM-DD")]
    InvalidDate(String),
    #[error("{0} Hz is not a standard audiometric frequency")]
    NonStandardFrequency(u32),
    #[error("unknown record category {0:?}")]
    UnknownCategory(String),
    #[error("record key {found} does not match exam {expected}")]
    KeyMismatch { expected: ExamKey, found: ExamKey },
    #[error("exam {key} already holds a {category} record")]
    DuplicateCategory { key: ExamKey, category: Category },
    #[error("record failed validation: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("malformed {category} record: {message}")]
    Malformed { category: Category, message: String },
}

impl DomainError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            DomainError::EmptyPatientId | DomainError::InvalidDate(_) => "invalid-key",
            DomainError::NonStandardFrequency(_) | DomainError::Invalid(_) => "validation-failed",
            DomainError::UnknownCategory(_) => "unknown-category",
            DomainError::KeyMismatch { .. } => "key-mismatch",
            DomainError::DuplicateCategory { .. } => "duplicate-category",
            DomainError::Malformed { .. } => "malformed-record",
        }
    }
}

pub(crate) fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
