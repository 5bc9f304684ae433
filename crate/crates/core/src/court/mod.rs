//! Bench orchestration over a text-generation protocol.
//!
//! Wire protocol (JSON over HTTP):
//!
//! * `POST /generate` `{"prompt", "temperature", "max_new_tokens", "seed"}`
//!   returns `{"text", "prompt_tokens"}`.
//! * `GET /health` returns `{"status": "ok", "justice_id"}`.

mod backend;
mod http;
mod orchestrator;
mod stub;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::{ParseFailure, PromptError, TokenBudget};
use crate::Decision;

pub use backend::{
    generate, Backend, BackendError, GenerateCall, GenerateRequest, GenerateResponse, HealthStatus,
};
pub use http::HttpBackend;
pub use orchestrator::{case_prompt, query_justice, run_case, run_docket, tally_majority};
pub use stub::{
    hash_unit, ScriptStep, ScriptedBackend, StubBackend, StubProfile, StubProfileError, StubSpec,
};

/// Prefix for per-justice endpoint overrides, e.g. `SCOTUS_SIM_ENDPOINT_SAALITO`.
pub const ENDPOINT_ENV_PREFIX: &str = "SCOTUS_SIM_ENDPOINT_";

fn default_temperature() -> f64 {
    0.5
}
fn default_max_new_tokens() -> u32 {
    1000
}
fn default_timeout_ms() -> u64 {
    60_000
}

/// Connection and generation settings for one justice agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub justice_id: String,
    pub endpoint: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_new_tokens")]
    pub max_new_tokens: u32,
    #[serde(default = "default_timeout_ms")]
    pub request_timeout_ms: u64,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl BackendDescriptor {
    pub fn new(justice_id: impl Into<String>, endpoint: impl Into<String>) -> Self {
        Self {
            justice_id: justice_id.into(),
            endpoint: endpoint.into(),
            temperature: default_temperature(),
            max_new_tokens: default_max_new_tokens(),
            request_timeout_ms: default_timeout_ms(),
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_millis(self.request_timeout_ms)
    }

    pub fn validate(&self) -> Result<(), CourtError> {
        let bad = |reason: String| CourtError::InvalidDescriptor {
            justice_id: self.justice_id.clone(),
            reason,
        };
        if self.justice_id.trim().is_empty() {
            return Err(bad("empty justice_id".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(bad(format!("temperature {} must be >= 0", self.temperature)));
        }
        if self.max_new_tokens == 0 {
            return Err(bad("max_new_tokens must be > 0".into()));
        }
        Ok(())
    }
}

/// Reads a JSON array of descriptors; justice ids must be unique.
pub fn load_registry(path: &Path) -> Result<Vec<BackendDescriptor>, CourtError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CourtError::Registry(format!("{}: {e}", path.display())))?;
    let descriptors: Vec<BackendDescriptor> = serde_json::from_str(&text)
        .map_err(|e| CourtError::Registry(format!("{}: {e}", path.display())))?;
    let mut seen = HashSet::new();
    for d in &descriptors {
        d.validate()?;
        if !seen.insert(d.justice_id.clone()) {
            return Err(CourtError::Registry(format!("duplicate justice `{}`", d.justice_id)));
        }
    }
    Ok(descriptors)
}

/// Replaces endpoints from `SCOTUS_SIM_ENDPOINT_<ID>` variables (id upper-cased).
pub fn apply_env_overrides(descriptors: &mut [BackendDescriptor]) {
    for d in descriptors {
        let var = format!("{ENDPOINT_ENV_PREFIX}{}", d.justice_id.to_uppercase());
        if let Ok(url) = std::env::var(&var) {
            log::info!("{var} overrides endpoint for {}", d.justice_id);
            d.endpoint = url;
        }
    }
}

/// A bench seat bound to the backend that serves it.
#[derive(Clone)]
pub struct Agent {
    pub descriptor: BackendDescriptor,
    pub backend: Arc<dyn Backend>,
}

impl Agent {
    pub fn new(descriptor: BackendDescriptor, backend: Arc<dyn Backend>) -> Self {
        Self {
            descriptor,
            backend,
        }
    }

    pub fn justice_id(&self) -> &str {
        &self.descriptor.justice_id
    }
}

impl std::fmt::Debug for Agent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Agent").field("descriptor", &self.descriptor).finish()
    }
}

/// Agents over HTTP, one client per descriptor.
pub fn http_bench(descriptors: &[BackendDescriptor]) -> Result<Vec<Agent>, CourtError> {
    descriptors
        .iter()
        .map(|d| {
            d.validate()?;
            let backend = HttpBackend::new(&d.endpoint, d.request_timeout())?;
            Ok(Agent::new(d.clone(), Arc::new(backend)))
        })
        .collect()
}

/// One agent per justice, all served by the same in-process backend.
pub fn shared_bench(justices: &[String], backend: Arc<dyn Backend>, seed: Option<u64>) -> Vec<Agent> {
    justices
        .iter()
        .map(|j| {
            let mut d = BackendDescriptor::new(j.clone(), "in-process://stub");
            d.seed = seed;
            Agent::new(d, backend.clone())
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CourtConfig {
    pub max_attempts: u32,
    /// Budget applied to the inference stub before it is sent.
    pub budget: TokenBudget,
    /// Fan out across justices and pipeline cases on the rayon pool.
    pub parallel: bool,
}

impl Default for CourtConfig {
    fn default() -> Self {
        Self {
            max_attempts: 10,
            budget: TokenBudget::default(),
            parallel: true,
        }
    }
}

/// A parsed `(opinion, decision)` from one justice agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentResult {
    pub opinion: String,
    pub decision: Decision,
    pub raw_text: String,
    pub attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Majority {
    Approve,
    Deny,
    Tie,
}

impl Majority {
    pub fn decision(self) -> Option<Decision> {
        match self {
            Majority::Approve => Some(Decision::Approve),
            Majority::Deny => Some(Decision::Deny),
            Majority::Tie => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub approve: usize,
    pub deny: usize,
}

impl Tally {
    /// Approve share of participating votes, `None` when nobody voted.
    pub fn approve_margin(&self) -> Option<f64> {
        let n = self.approve + self.deny;
        (n > 0).then(|| self.approve as f64 / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedJustice {
    pub justice_id: String,
    pub error: String,
}

/// Fan-in result for one case. Maps and lists are ordered by justice id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub case_id: String,
    pub per_justice: BTreeMap<String, AgentResult>,
    pub tally: Tally,
    pub majority: Majority,
    pub failed_justices: Vec<FailedJustice>,
    /// Case-level failure, set when no agent produced a valid result or the
    /// case could not be prompted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SimulationOutcome {
    pub fn total_attempts(&self) -> u32 {
        self.per_justice.values().map(|r| r.attempts).sum()
    }
}

/// The last failure seen before retries ran out.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum AttemptFailure {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Parse(#[from] ParseFailure),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CourtError {
    #[error("exhausted {attempts} attempts; last failure: {last}")]
    ExhaustedRetries { attempts: u32, last: AttemptFailure },
    #[error("all {} agents failed", failed.len())]
    AllAgentsFailed { failed: Vec<FailedJustice> },
    #[error("bench is empty")]
    EmptyBench,
    #[error("case {case_id} cannot be prompted: {reason}")]
    InvalidCase { case_id: String, reason: String },
    #[error("max_attempts must be at least 1")]
    InvalidAttempts,
    #[error("descriptor for `{justice_id}`: {reason}")]
    InvalidDescriptor { justice_id: String, reason: String },
    #[error("registry: {0}")]
    Registry(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}
