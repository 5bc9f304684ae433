//! Dictionary-style prompt records: emit, budget, parse.
//!
//! Emitted layout (`\n` is a newline, the seeking line is optional):
//!
//! ```text
//! {
//!  'issue': '<esc>',
//!  'topic': '<esc>',
//!  'Appellant is seeking a': '<esc>',
//!  'opinion': '<esc>',
//!  'decision': '<esc>'
//! }
//! ```
//!
//! Inference stubs stop right after `'opinion': '` so the model continues
//! with the opinion text and then the decision pair.

mod budget;
mod codec;
mod parse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Decision;

pub use budget::{fit_to_budget, TokenBudget, TokenCounter, TokenEstimator};
pub use codec::{escape_value, serialize_prompt, unescape_value, Mode};
pub use parse::{normalize_decision, parse_completion, ParseFailure, ParsedCompletion};

/// Key used for the optional relief-sought field.
pub const SEEKING_KEY: &str = "Appellant is seeking a";

/// Four-field (plus optional seeking) record the agents consume and complete.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub issue: String,
    pub topic: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeking: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opinion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
}

impl PromptRecord {
    pub fn training(
        issue: impl Into<String>,
        topic: impl Into<String>,
        opinion: impl Into<String>,
        decision: Decision,
    ) -> Self {
        Self {
            issue: issue.into(),
            topic: topic.into(),
            seeking: None,
            opinion: Some(opinion.into()),
            decision: Some(decision),
        }
    }

    pub fn inference(issue: impl Into<String>, topic: impl Into<String>) -> Self {
        Self {
            issue: issue.into(),
            topic: topic.into(),
            seeking: None,
            opinion: None,
            decision: None,
        }
    }

    pub fn with_seeking(mut self, seeking: impl Into<String>) -> Self {
        self.seeking = Some(seeking.into());
        self
    }

    /// Training records carry both opinion and decision.
    pub fn is_training(&self) -> bool {
        self.opinion.is_some() && self.decision.is_some()
    }

    pub fn is_inference(&self) -> bool {
        self.opinion.is_none() && self.decision.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("field `{field}` contains control character U+{code:04X}")]
    UnescapableText { field: &'static str, code: u32 },
    #[error("budget of {max_tokens} tokens cannot hold issue and decision ({required} tokens minimum)")]
    BudgetImpossible { max_tokens: usize, required: usize },
    #[error("invalid token budget: {0}")]
    InvalidBudget(String),
}
