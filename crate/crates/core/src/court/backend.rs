use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::BackendDescriptor;

/// `POST /generate` request body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_new_tokens: u32,
    pub seed: Option<u64>,
}

/// `POST /generate` response body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub text: String,
    #[serde(default)]
    pub prompt_tokens: Option<u64>,
}

/// `GET /health` response body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    pub justice_id: String,
}

impl HealthStatus {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Transport-level failures. All are retryable.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum BackendError {
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("connection error: {0}")]
    Connection(String),
    #[error("protocol error: {0}")]
    Protocol(String),
}

/// One generation call. `justice_id` and `case_id` are orchestration context
/// for in-process backends; only `request` goes over the wire.
#[derive(Debug, Clone)]
pub struct GenerateCall<'a> {
    pub justice_id: &'a str,
    pub case_id: &'a str,
    pub request: GenerateRequest,
}

/// A text-generation service for one or more justices.
pub trait Backend: Send + Sync {
    fn generate(&self, call: &GenerateCall<'_>) -> Result<GenerateResponse, BackendError>;

    fn health(&self, justice_id: &str) -> Result<HealthStatus, BackendError>;
}

/// Sends `prompt` with the descriptor's generation settings and returns the
/// completion text verbatim.
pub fn generate(
    backend: &dyn Backend,
    descriptor: &BackendDescriptor,
    case_id: &str,
    prompt: &str,
    seed: Option<u64>,
) -> Result<String, BackendError> {
    let call = GenerateCall {
        justice_id: &descriptor.justice_id,
        case_id,
        request: GenerateRequest {
            prompt: prompt.to_string(),
            temperature: descriptor.temperature,
            max_new_tokens: descriptor.max_new_tokens,
            seed,
        },
    };
    backend.generate(&call).map(|r| r.text)
}
