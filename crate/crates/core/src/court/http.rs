use std::time::Duration;

use reqwest::blocking::Client;

use super::backend::{Backend, BackendError, GenerateCall, GenerateResponse, HealthStatus};

/// Blocking JSON client for one generation endpoint.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    client: Client,
    base: String,
}

impl HttpBackend {
    pub fn new(endpoint: &str, timeout: Duration) -> Result<Self, BackendError> {
        let client = Client::builder()
            .timeout(timeout)
            .connect_timeout(timeout)
            .build()
            .map_err(|e| BackendError::Connection(e.to_string()))?;
        Ok(Self {
            client,
            base: endpoint.trim_end_matches('/').to_string(),
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.base
    }
}

fn transport_error(e: reqwest::Error) -> BackendError {
    if e.is_timeout() {
        BackendError::Timeout(e.to_string())
    } else if e.is_connect() || e.is_request() {
        BackendError::Connection(e.to_string())
    } else {
        BackendError::Protocol(e.to_string())
    }
}

fn read_envelope<T: serde::de::DeserializeOwned>(
    response: reqwest::blocking::Response,
) -> Result<T, BackendError> {
    let status = response.status();
    let body = response.text().map_err(transport_error)?;
    if !status.is_success() {
        return Err(BackendError::Protocol(format!("HTTP {status}: {body}")));
    }
    serde_json::from_str(&body).map_err(|e| BackendError::Protocol(format!("bad envelope: {e}")))
}

impl Backend for HttpBackend {
    fn generate(&self, call: &GenerateCall<'_>) -> Result<GenerateResponse, BackendError> {
        let response = self
            .client
            .post(format!("{}/generate", self.base))
            .json(&call.request)
            .send()
            .map_err(transport_error)?;
        read_envelope(response)
    }

    fn health(&self, _justice_id: &str) -> Result<HealthStatus, BackendError> {
        let response = self
            .client
            .get(format!("{}/health", self.base))
            .send()
            .map_err(transport_error)?;
        read_envelope(response)
    }
}
