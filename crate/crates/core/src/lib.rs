//! Domain records, diagnostic metrics, charts and printable reports for
//! hearing test examinations.

pub mod aggregate;
pub mod chart;
pub mod error;
pub mod metrics;
pub mod model;
pub mod report;
pub mod sample;
pub mod validate;

pub use aggregate::{exam_aggregate, Category, ExamAggregate, Record};
pub use error::DomainError;
pub use model::*;
pub use validate::{Validate, Violation};
