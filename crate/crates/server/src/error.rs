use audiology_core::chart::ChartError;
use audiology_core::metrics::MetricsError;
use audiology_core::report::ReportError;
use audiology_core::DomainError;
use audiology_store::{AuthError, StoreError};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Error body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub details: Value,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody { code: code.to_string(), message: message.into(), details: Value::Null },
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.body.details = details;
        self
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing, invalid or expired session token")
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", message)
    }

    pub fn code(&self) -> &str {
        &self.body.code
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<DomainError> for ApiError {
    fn from(e: DomainError) -> Self {
        let details = match &e {
            DomainError::Invalid(v) => serde_json::to_value(v).expect("violations serialize"),
            _ => Value::Null,
        };
        let status = match e {
            DomainError::UnknownCategory(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, e.code(), e.to_string()).with_details(details)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::Domain(d) => return d.clone().into(),
            StoreError::AlreadyExists(_) => StatusCode::CONFLICT,
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            StoreError::EmptyCriteria | StoreError::Transfer { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            StoreError::AuthenticationFailure => StatusCode::FORBIDDEN,
            StoreError::Closed | StoreError::Locked(_) => StatusCode::SERVICE_UNAVAILABLE,
            StoreError::NotAStore(_) | StoreError::UnsupportedVersion { .. } | StoreError::Io(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<AuthError> for ApiError {
    fn from(e: AuthError) -> Self {
        let status = match &e {
            AuthError::AlreadyRegistered(_) => StatusCode::CONFLICT,
            AuthError::WeakPassword | AuthError::InvalidUsername => StatusCode::UNPROCESSABLE_ENTITY,
            AuthError::UnknownUser(_) => StatusCode::NOT_FOUND,
            AuthError::AuthenticationFailure => StatusCode::UNAUTHORIZED,
            AuthError::Kdf(_) | AuthError::Malformed(_) | AuthError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<MetricsError> for ApiError {
    fn from(e: MetricsError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
    }
}

impl From<ChartError> for ApiError {
    fn from(e: ChartError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
    }
}
