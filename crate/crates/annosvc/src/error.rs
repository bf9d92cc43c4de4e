use std::path::PathBuf;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use candor_core::annotate::{AnnotateError, ErrorKind};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error("round {0:?} not found")]
    UnknownRound(String),
    #[error("review {0:?} not found")]
    UnknownReview(String),
    #[error("round {0:?} already exists")]
    RoundExists(String),
    #[error("round id {0:?} must be 1-64 characters of [A-Za-z0-9_-]")]
    BadRoundId(String),
    #[error("reviews not in the loaded corpus: {}", .0.join(", "))]
    NotInCorpus(Vec<String>),
    #[error("missing X-Analyst-Id header")]
    MissingAnalyst,
    #[error("malformed request body: {0}")]
    Body(String),
    #[error("{}:{line}: {message}", .path.display())]
    Log { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::Annotate(e) => match e.kind() {
                ErrorKind::NotFound => StatusCode::NOT_FOUND,
                ErrorKind::Conflict => StatusCode::CONFLICT,
                ErrorKind::Invalid => StatusCode::UNPROCESSABLE_ENTITY,
            },
            ServiceError::UnknownRound(_) | ServiceError::UnknownReview(_) => StatusCode::NOT_FOUND,
            ServiceError::RoundExists(_) => StatusCode::CONFLICT,
            ServiceError::BadRoundId(_) | ServiceError::NotInCorpus(_) | ServiceError::Body(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::MissingAnalyst => StatusCode::UNAUTHORIZED,
            ServiceError::Log { .. } | ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Annotate(e) => e.code(),
            ServiceError::UnknownRound(_) => "unknown_round",
            ServiceError::UnknownReview(_) => "unknown_review",
            ServiceError::RoundExists(_) => "round_exists",
            ServiceError::BadRoundId(_) => "bad_round_id",
            ServiceError::NotInCorpus(_) => "not_in_corpus",
            ServiceError::MissingAnalyst => "missing_analyst",
            ServiceError::Body(_) => "malformed_body",
            ServiceError::Log { .. } => "event_log",
            ServiceError::Io(_) => "io",
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code().to_string(),
            message: self.to_string(),
        };
        (self.status(), Json(body)).into_response()
    }
}
