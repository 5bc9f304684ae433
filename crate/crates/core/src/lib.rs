//! Multi-agent simulation of a nine-member appellate bench.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] ingests SCDB case/vote tables and an opinion corpus, selects
//!   unanimous cases, splits off a held-out test docket and exports training
//!   sets.
//! * [`prompt`] serializes the dictionary-style prompt the justice agents
//!   consume, enforces a token budget, and parses model continuations back
//!   into an `(opinion, decision)` pair.
//! * [`court`] fans a case out to one agent per justice over a generation
//!   protocol, retries invalid completions and tallies the majority.
//! * [`metrics`] computes accuracy, Cohen's κ, ROC AUC, Pearson/phi
//!   correlations, Cohen's d, normal overlap and bootstrap intervals.

pub mod corpus;
pub mod court;
pub mod justices;
pub mod metrics;
pub mod prompt;
mod types;

pub use corpus::{Case, CorpusSplit, JusticeVote, OpinionDoc};
pub use court::{
    AgentResult, Backend, BackendDescriptor, CourtConfig, Majority, SimulationOutcome, StubBackend,
    StubProfile,
};
pub use metrics::{LabeledPredictions, MetricsReport};
pub use prompt::{PromptRecord, TokenBudget};
pub use types::{Decision, Vote};
