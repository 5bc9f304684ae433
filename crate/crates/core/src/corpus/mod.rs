//! Court record ingestion and training-set construction.

mod opinions;
mod scdb;
mod split;
pub mod synthetic;
mod training;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{Decision, Vote};

pub use opinions::{attach_opinions, clean_text, ManifestEntry, OpinionSet};
pub use scdb::{issue_area_code, issue_area_label, load_scdb, read_scdb, write_scdb, ScdbTables};
pub use split::{split_corpus, CorpusSplit, SplitOptions};
pub use training::{
    base_training_records, build_base_training_set, build_justice_training_sets,
    export_training_jsonl, is_unanimous, PassThroughSummarizer, Summarizer, TrainingOptions,
    TrainingSets,
};

/// One decided case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub case_id: String,
    pub term: i32,
    pub natural_court: String,
    pub issue_area: String,
    #[serde(default)]
    pub topic_summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeking: Option<String>,
    /// `None` when the source outcome code is unclear.
    pub disposition: Option<Decision>,
    pub precedent_altered: bool,
    pub decided_date: NaiveDate,
}

/// One justice's real-world vote on one case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JusticeVote {
    pub case_id: String,
    pub justice_id: String,
    pub vote: Vote,
    /// Absent exactly when recused.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub with_majority: Option<bool>,
}

/// An authored opinion joined to its case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpinionDoc {
    pub case_id: String,
    pub justice_id: String,
    pub text: String,
    pub decision: Decision,
    pub written_year: i32,
}

/// A row or entry that was not turned into output, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipEntry {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    pub key: String,
    pub reason: String,
}

impl SkipEntry {
    pub(crate) fn new(
        source: impl Into<String>,
        line: Option<u64>,
        key: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Self {
            source: source.into(),
            line,
            key: key.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },
    #[error("{file}:{line}: malformed row: {reason}")]
    MalformedRow { file: String, line: u64, reason: String },
    #[error("duplicate key {0}")]
    DuplicateKey(String),
    #[error("{file}:{line}: manifest parse error: {reason}")]
    ManifestParse { file: String, line: u64, reason: String },
    #[error("opinion file {0} is empty")]
    EmptyOpinion(PathBuf),
    #[error("no results: {0}")]
    EmptyResult(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Prompt(#[from] crate::prompt::PromptError),
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).expect("corpus types serialize");
        writeln!(out, "{line}").map_err(|e| CorpusError::io(path, e))?;
    }
    out.flush().map_err(|e| CorpusError::io(path, e))
}

/// Reads a JSONL file, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut items = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| CorpusError::MalformedRow {
            file: path.display().to_string(),
            line: idx as u64 + 1,
            reason: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(items)
}

/// Natural-court tags compare on their label, so `1704` matches `Roberts IV`.
pub fn same_court(tag: &str, other: &str) -> bool {
    crate::justices::natural_court_label(tag) == crate::justices::natural_court_label(other)
}
