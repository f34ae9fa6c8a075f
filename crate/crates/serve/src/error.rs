use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use leafrf_core::discrete::DiscreteError;
use leafrf_core::ladder::LadderError;
use leafrf_core::rfcore::RfError;
use leafrf_core::synth::SynthError;
use leafrf_core::touchstone::TouchstoneError;
use leafrf_core::units::UnitError;

/// Every failure leaves the service as `{"error": {"code", "message", "line"?}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub line: Option<usize>,
}

#[derive(Serialize)]
struct Body<'a> {
    error: Detail<'a>,
}

#[derive(Serialize)]
struct Detail<'a> {
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), line: None }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no session {id:?}"))
    }

    pub fn too_large(limit: usize) -> Self {
        ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "too_large", format!("upload exceeds {limit} bytes"))
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "computation", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body { error: Detail { code: self.code, message: &self.message, line: self.line } };
        (self.status, Json(body)).into_response()
    }
}

impl From<TouchstoneError> for ApiError {
    fn from(e: TouchstoneError) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, code: "bad_s1p", message: e.to_string(), line: e.line() }
    }
}

impl From<UnitError> for ApiError {
    fn from(e: UnitError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<RfError> for ApiError {
    fn from(e: RfError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

/// Errors raised while evaluating a stack that was already accepted.
pub fn computation(e: impl std::fmt::Display) -> ApiError {
    ApiError::unprocessable(e.to_string())
}

/// Rejections of a new element or stack: bad values are the caller's fault.
pub fn invalid_element(e: LadderError) -> ApiError {
    match e {
        LadderError::Degenerate { .. } | LadderError::Measured(_) => computation(e),
        _ => ApiError::bad_request(e.to_string()),
    }
}

pub fn synth(e: SynthError) -> ApiError {
    computation(e)
}

pub fn discrete(e: DiscreteError) -> ApiError {
    match e {
        DiscreteError::CandidateCap { .. } | DiscreteError::BadTolerance => ApiError::bad_request(e.to_string()),
        other => computation(other),
    }
}
