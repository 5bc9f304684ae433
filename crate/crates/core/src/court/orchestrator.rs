use std::collections::BTreeMap;

use rayon::prelude::*;

use super::backend::generate;
use super::{
    Agent, AgentResult, AttemptFailure, CourtConfig, CourtError, FailedJustice, Majority,
    SimulationOutcome, Tally,
};
use crate::corpus::Case;
use crate::prompt::{fit_to_budget, parse_completion, serialize_prompt, Mode, PromptRecord};
use crate::Decision;

/// Counts decisions; strict plurality wins, equal counts tie.
pub fn tally_majority<I: IntoIterator<Item = Decision>>(decisions: I) -> (Tally, Majority) {
    let mut tally = Tally::default();
    for d in decisions {
        match d {
            Decision::Approve => tally.approve += 1,
            Decision::Deny => tally.deny += 1,
        }
    }
    let majority = match tally.approve.cmp(&tally.deny) {
        std::cmp::Ordering::Greater => Majority::Approve,
        std::cmp::Ordering::Less => Majority::Deny,
        std::cmp::Ordering::Equal => Majority::Tie,
    };
    (tally, majority)
}

/// Generates and parses until a valid `(opinion, decision)` comes back or
/// `max_attempts` calls have been spent. With a configured seed, attempt `k`
/// (0-based) is sent with `seed + k`.
pub fn query_justice(
    agent: &Agent,
    case_id: &str,
    record: &PromptRecord,
    max_attempts: u32,
) -> Result<AgentResult, CourtError> {
    if max_attempts == 0 {
        return Err(CourtError::InvalidAttempts);
    }
    let prompt = serialize_prompt(record, Mode::Inference)?;
    let mut last = None;
    for attempt in 0..max_attempts {
        let seed = agent.descriptor.seed.map(|s| s.wrapping_add(attempt as u64));
        let failure = match generate(agent.backend.as_ref(), &agent.descriptor, case_id, &prompt, seed) {
            Ok(text) => {
                // Backends may echo the prompt; parse against the full record either way.
                let parsed = if text.starts_with(&prompt) {
                    parse_completion(&text)
                } else {
                    parse_completion(&format!("{prompt}{text}"))
                };
                match parsed {
                    Ok(p) => {
                        return Ok(AgentResult {
                            opinion: p.opinion,
                            decision: p.decision,
                            raw_text: text,
                            attempts: attempt + 1,
                        })
                    }
                    Err(e) => AttemptFailure::Parse(e),
                }
            }
            Err(e) => AttemptFailure::Backend(e),
        };
        log::debug!(
            "{} on {case_id}: attempt {} failed: {failure}",
            agent.justice_id(),
            attempt + 1
        );
        last = Some(failure);
    }
    Err(CourtError::ExhaustedRetries {
        attempts: max_attempts,
        last: last.expect("at least one attempt"),
    })
}

/// Inference stub for a case, fitted to the configured budget.
pub fn case_prompt(case: &Case, config: &CourtConfig) -> Result<PromptRecord, CourtError> {
    let invalid = |reason: &str| CourtError::InvalidCase {
        case_id: case.case_id.clone(),
        reason: reason.to_string(),
    };
    if case.issue_area.trim().is_empty() {
        return Err(invalid("missing issue area"));
    }
    if case.topic_summary.trim().is_empty() {
        return Err(invalid("missing topic summary"));
    }
    let mut record = PromptRecord::inference(case.issue_area.trim(), case.topic_summary.trim());
    record.seeking = case.seeking.clone();
    Ok(fit_to_budget(&record, &config.budget)?)
}

/// Fans the case out to every agent, waits for all of them, and tallies the
/// valid votes. Justices that run out of attempts are excluded from the tally.
pub fn run_case(case: &Case, bench: &[Agent], config: &CourtConfig) -> Result<SimulationOutcome, CourtError> {
    if bench.is_empty() {
        return Err(CourtError::EmptyBench);
    }
    if config.max_attempts == 0 {
        return Err(CourtError::InvalidAttempts);
    }
    let record = case_prompt(case, config)?;
    let query = |agent: &Agent| {
        (
            agent.justice_id().to_string(),
            query_justice(agent, &case.case_id, &record, config.max_attempts),
        )
    };
    let results: Vec<(String, Result<AgentResult, CourtError>)> = if config.parallel {
        bench.par_iter().map(query).collect()
    } else {
        bench.iter().map(query).collect()
    };

    let mut per_justice = BTreeMap::new();
    let mut failed = Vec::new();
    for (justice_id, result) in results {
        match result {
            Ok(r) => {
                per_justice.insert(justice_id, r);
            }
            Err(e) => failed.push(FailedJustice {
                justice_id,
                error: e.to_string(),
            }),
        }
    }
    failed.sort_by(|a, b| a.justice_id.cmp(&b.justice_id));

    if per_justice.is_empty() {
        return Err(CourtError::AllAgentsFailed { failed });
    }
    let (tally, majority) = tally_majority(per_justice.values().map(|r| r.decision));
    Ok(SimulationOutcome {
        case_id: case.case_id.clone(),
        per_justice,
        tally,
        majority,
        failed_justices: failed,
        error: None,
    })
}

/// Runs every case independently; failures are recorded in the outcome and
/// never abort the batch. Output order matches input order.
pub fn run_docket(cases: &[Case], bench: &[Agent], config: &CourtConfig) -> Vec<SimulationOutcome> {
    let run = |case: &Case| match run_case(case, bench, config) {
        Ok(outcome) => outcome,
        Err(e) => failed_outcome(case, bench, e),
    };
    let outcomes: Vec<SimulationOutcome> = if config.parallel {
        cases.par_iter().map(run).collect()
    } else {
        cases.iter().map(run).collect()
    };

    let failed_cases = outcomes.iter().filter(|o| o.error.is_some()).count();
    let attempts: u32 = outcomes.iter().map(|o| o.total_attempts()).sum();
    let answers: usize = outcomes.iter().map(|o| o.per_justice.len()).sum();
    log::info!(
        "docket: {} cases, {} failed, {} agent answers in {} attempts",
        outcomes.len(),
        failed_cases,
        answers,
        attempts
    );
    outcomes
}

fn failed_outcome(case: &Case, bench: &[Agent], error: CourtError) -> SimulationOutcome {
    log::warn!("case {} failed: {error}", case.case_id);
    let failed_justices = match &error {
        CourtError::AllAgentsFailed { failed } => failed.clone(),
        other => {
            let mut all: Vec<FailedJustice> = bench
                .iter()
                .map(|a| FailedJustice {
                    justice_id: a.justice_id().to_string(),
                    error: other.to_string(),
                })
                .collect();
            all.sort_by(|a, b| a.justice_id.cmp(&b.justice_id));
            all
        }
    };
    SimulationOutcome {
        case_id: case.case_id.clone(),
        per_justice: BTreeMap::new(),
        tally: Tally::default(),
        majority: Majority::Tie,
        failed_justices,
        error: Some(error.to_string()),
    }
}
