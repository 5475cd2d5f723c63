use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub package: Option<String>,
}

impl ApiError {
    pub fn not_found(package: &str) -> Self {
        ApiError { status: StatusCode::NOT_FOUND, error: format!("unknown package `{package}`"), package: Some(package.to_string()) }
    }

    pub fn bad_request(msg: impl Into<String>) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, error: msg.into(), package: None }
    }
}

impl From<depheavy::Error> for ApiError {
    fn from(e: depheavy::Error) -> Self {
        match e {
            depheavy::Error::UnknownPackage(p) => ApiError::not_found(&p),
            depheavy::Error::Domain(_) | depheavy::Error::MissingEdge { .. } | depheavy::Error::MissingWeakEdge { .. } => {
                ApiError::bad_request(e.to_string())
            }
            other => ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, error: other.to_string(), package: None },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}
