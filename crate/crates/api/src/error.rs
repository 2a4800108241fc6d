use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use harmonize_search::{QueryError, QueryErrorKind, SearchError};
use serde_json::json;

/// Error body: `{"error": {"code", "message", "position"?}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub position: Option<usize>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), position: None }
    }

    pub fn bad_parameter(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_parameter", message)
    }

    pub fn not_ready() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "not_ready", "no index snapshot has been loaded yet")
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let code = match e.kind {
            QueryErrorKind::Syntax => "query_syntax",
            QueryErrorKind::UnknownField => "unknown_field",
            QueryErrorKind::DateRange => "invalid_date_range",
        };
        ApiError { status: StatusCode::BAD_REQUEST, code, message: e.to_string(), position: Some(e.position) }
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        let code = match e {
            SearchError::UnknownField(_) => "unknown_field",
            SearchError::NotFacetField(_) => "not_a_facet",
            SearchError::InvalidQuery(_) => "query_syntax",
            SearchError::OutOfRange(_) | SearchError::DuplicateId(_) => "invalid_parameter",
        };
        Self::new(StatusCode::BAD_REQUEST, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({ "code": self.code, "message": self.message });
        if let Some(p) = self.position {
            error["position"] = json!(p);
        }
        (self.status, Json(json!({ "error": error }))).into_response()
    }
}
