use amalgam_core::CodaError;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::{json, Value};

use crate::session::Conflict;

#[derive(Debug)]
pub enum ApiError {
    /// Malformed upload; maps to 400 with cell or part diagnostics.
    Input(CodaError),
    /// Well-formed request the analysis cannot satisfy; 422.
    Unprocessable(CodaError),
    /// Rejected against the current state, which is returned; 409 or 422.
    State(Conflict),
    NotFound(String),
    BadRequest(String),
}

fn kind(e: &CodaError) -> &'static str {
    match e {
        CodaError::Parse { .. } => "parse",
        CodaError::Csv(_) => "csv",
        CodaError::Io(_) => "io",
        CodaError::Json(_) => "json",
        CodaError::Shape(_) => "shape",
        CodaError::DuplicatePart(_) => "duplicate-part",
        CodaError::UnknownName(_) => "unknown-name",
        CodaError::Negative { .. } => "negative",
        CodaError::ZeroRow { .. } => "zero-row",
        CodaError::AllZeroColumn { .. } => "all-zero-column",
        CodaError::NonPositive { .. } => "non-positive",
        CodaError::Weights(_) => "weights",
        CodaError::InvalidLogratio(_) => "invalid-logratio",
        CodaError::Overlap { .. } => "overlap",
        CodaError::DuplicateLogratio(_) => "duplicate-logratio",
        CodaError::Hierarchy(_) => "hierarchy",
        CodaError::SiblingRule { .. } => "sibling-rule",
        CodaError::Degenerate(_) => "degenerate",
    }
}

fn detail(e: &CodaError) -> Value {
    match e {
        CodaError::Parse { row, column, .. } => json!({ "row": row, "column": column }),
        CodaError::Negative { row, part, .. } | CodaError::NonPositive { row, part } => {
            json!({ "row": row, "part": part })
        }
        CodaError::ZeroRow { row, .. } => json!({ "row": row }),
        CodaError::AllZeroColumn { part } | CodaError::Overlap { part } | CodaError::DuplicatePart(part) => {
            json!({ "part": part })
        }
        CodaError::UnknownName(name) => json!({ "name": name }),
        CodaError::SiblingRule { slr, .. } => json!({ "logratio": slr }),
        _ => Value::Null,
    }
}

fn body(e: &CodaError) -> Value {
    json!({ "error": kind(e), "message": e.to_string(), "detail": detail(e) })
}

/// Upload errors are the caller's data; everything else is a request the
/// analysis rejects.
pub fn upload_error(e: CodaError) -> ApiError {
    match e {
        CodaError::Parse { .. }
        | CodaError::Csv(_)
        | CodaError::Negative { .. }
        | CodaError::ZeroRow { .. }
        | CodaError::AllZeroColumn { .. }
        | CodaError::DuplicatePart(_)
        | CodaError::Shape(_)
        | CodaError::Weights(_) => ApiError::Input(e),
        other => ApiError::Unprocessable(other),
    }
}

impl From<CodaError> for ApiError {
    fn from(e: CodaError) -> Self {
        ApiError::Unprocessable(e)
    }
}

impl From<Conflict> for ApiError {
    fn from(c: Conflict) -> Self {
        ApiError::State(c)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, value) = match self {
            ApiError::Input(e) => (StatusCode::BAD_REQUEST, body(&e)),
            ApiError::Unprocessable(e) => (StatusCode::UNPROCESSABLE_ENTITY, body(&e)),
            ApiError::State(Conflict { error, state }) => {
                let status = if matches!(error, CodaError::SiblingRule { .. }) {
                    StatusCode::CONFLICT
                } else {
                    StatusCode::UNPROCESSABLE_ENTITY
                };
                let mut value = body(&error);
                value["state"] = serde_json::to_value(&*state).unwrap_or(Value::Null);
                (status, value)
            }
            ApiError::NotFound(id) => (
                StatusCode::NOT_FOUND,
                json!({ "error": "not-found", "message": format!("no session `{id}`"), "detail": null }),
            ),
            ApiError::BadRequest(message) => (
                StatusCode::BAD_REQUEST,
                json!({ "error": "bad-request", "message": message, "detail": null }),
            ),
        };
        (status, Json(value)).into_response()
    }
}
