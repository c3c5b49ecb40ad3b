use axum::extract::Request;
use axum::http::StatusCode;
use axum::middleware::Next;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use twinmat_core::Error;

/// Error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

/// Machine code to HTTP status. Every code produced by the engine appears
/// exactly once; `BadRequest` covers malformed query strings.
pub const STATUS_TABLE: &[(&str, u16)] = &[
    ("ParseError", 400),
    ("BadRequest", 400),
    ("ValidationError", 422),
    ("DomainError", 422),
    ("IncompleteChecklist", 422),
    ("GateRefusal", 422),
    ("ModelMismatch", 409),
    ("UnknownModel", 404),
    ("NotFound", 404),
    ("LockHeld", 423),
    ("ConsistencyError", 500),
    ("StorageError", 500),
];

pub fn status_for(code: &str) -> StatusCode {
    STATUS_TABLE
        .iter()
        .find(|(c, _)| *c == code)
        .and_then(|(_, s)| StatusCode::from_u16(*s).ok())
        .unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
}

/// Handler-side failure. The request path is filled in by [`attach_path`].
#[derive(Debug)]
pub struct Failure {
    code: &'static str,
    message: String,
    details: Option<Value>,
}

impl Failure {
    pub fn bad_request(message: impl Into<String>) -> Self {
        Self {
            code: "BadRequest",
            message: message.into(),
            details: None,
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self {
            code: "NotFound",
            message: message.into(),
            details: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let details = match &e {
            Error::GateRefusal(verdict) => serde_json::to_value(verdict).ok(),
            Error::Validation(violations) => serde_json::to_value(violations).ok(),
            Error::Parse { line, column, .. } => {
                Some(serde_json::json!({ "line": line, "column": column }))
            }
            _ => None,
        };
        Self {
            code: e.code(),
            message: e.to_string(),
            details,
        }
    }
}

#[derive(Clone)]
struct Pending(ApiError);

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let status = status_for(self.code);
        let body = ApiError {
            status: status.as_u16(),
            code: self.code.to_owned(),
            message: self.message,
            path: String::new(),
            details: self.details,
        };
        let mut resp = status.into_response();
        resp.extensions_mut().insert(Pending(body));
        resp
    }
}

pub async fn attach_path(req: Request, next: Next) -> Response {
    let path = req.uri().path().to_owned();
    let resp = next.run(req).await;
    match resp.extensions().get::<Pending>().cloned() {
        Some(Pending(mut body)) => {
            body.path = path;
            let status = status_for(&body.code);
            (status, Json(body)).into_response()
        }
        None => resp,
    }
}
