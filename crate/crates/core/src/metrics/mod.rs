//! Evaluation measures for simulated benches.

mod bootstrap;
mod classification;
mod correlation;
mod effect;
mod report;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Decision;

pub use bootstrap::{bootstrap_ci, percentile};
pub use classification::{accuracy, auc_from_scores, cohen_kappa, implied_chance_agreement, roc_auc};
pub use correlation::{
    alignment_correlation, anti_overturn_frequency, pearson_r, vote_correlation_matrix,
    CorrelationMatrix,
};
pub use effect::{cohen_d, normal_cdf, overlap_coefficient};
pub use report::{evaluate, BaselineComparison, EvaluationExtras, JusticeMetrics, MetricsReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledItem {
    pub case_id: String,
    pub predicted: Decision,
    pub actual: Decision,
}

impl LabeledItem {
    pub fn new(case_id: impl Into<String>, predicted: Decision, actual: Decision) -> Self {
        Self {
            case_id: case_id.into(),
            predicted,
            actual,
        }
    }
}

/// Predictions against ground truth, with an optional score per item
/// (approve-vote margin) for ROC analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPredictions {
    items: Vec<LabeledItem>,
    scores: Option<Vec<f64>>,
}

impl LabeledPredictions {
    pub fn new(items: Vec<LabeledItem>, scores: Option<Vec<f64>>) -> Result<Self, MetricsError> {
        let mut seen = HashSet::new();
        if let Some(dup) = items.iter().find(|i| !seen.insert(i.case_id.as_str())) {
            return Err(MetricsError::DuplicateCase(dup.case_id.clone()));
        }
        if let Some(scores) = &scores {
            if scores.len() != items.len() {
                return Err(MetricsError::LengthMismatch {
                    left: items.len(),
                    right: scores.len(),
                });
            }
            if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
                return Err(MetricsError::InvalidArgument(format!("score {bad} outside [0, 1]")));
            }
        }
        Ok(Self { items, scores })
    }

    /// Builds from parallel decision vectors with synthetic ids `0..n`.
    pub fn from_pairs(pairs: &[(Decision, Decision)]) -> Self {
        let items = pairs
            .iter()
            .enumerate()
            .map(|(i, &(p, a))| LabeledItem::new(i.to_string(), p, a))
            .collect();
        Self { items, scores: None }
    }

    pub fn with_scores(self, scores: Vec<f64>) -> Result<Self, MetricsError> {
        Self::new(self.items, Some(scores))
    }

    pub fn items(&self) -> &[LabeledItem] {
        &self.items
    }

    pub fn scores(&self) -> Option<&[f64]> {
        self.scores.as_deref()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Resampled copy; case ids may repeat.
    pub(crate) fn select(&self, indices: &[usize]) -> Self {
        Self {
            items: indices.iter().map(|&i| self.items[i].clone()).collect(),
            scores: self
                .scores
                .as_ref()
                .map(|s| indices.iter().map(|&i| s[i]).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("chance agreement is 1 but observed agreement is {observed}")]
    DegenerateMarginals { observed: f64 },
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("only one class among actual outcomes")]
    SingleClass,
    #[error("scores missing")]
    MissingScores,
    #[error("zero variance")]
    ZeroVariance,
    #[error("zero pooled variance")]
    ZeroPooledVariance,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} items, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("need at least 3 justices, got {0}")]
    InsufficientJustices(usize),
    #[error("justice keys differ between inputs: {0}")]
    KeyMismatch(String),
    #[error("duplicate case {0}")]
    DuplicateCase(String),
    #[error("no truth for case {0}")]
    MissingTruth(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
