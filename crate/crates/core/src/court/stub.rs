//! In-process backends: a hashed-coin stub standing in for trained models,
//! and a scripted backend for exercising retry paths.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::backend::{Backend, BackendError, GenerateCall, GenerateResponse, HealthStatus};
use crate::justices::display_name;
use crate::prompt::{escape_value, TokenEstimator};
use crate::Decision;

/// Per-justice stub parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubSpec {
    /// Probability of an Approve vote when no accuracy target applies.
    pub approve_rate: f64,
    #[serde(default)]
    pub seed: u64,
    /// Share of the known dispositions this justice matches. Used only for
    /// cases whose truth the stub was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

impl StubSpec {
    pub fn new(approve_rate: f64, seed: u64) -> Self {
        Self {
            approve_rate,
            seed,
            accuracy: None,
        }
    }

    pub fn with_accuracy(accuracy: f64, seed: u64) -> Self {
        Self {
            approve_rate: 0.5,
            seed,
            accuracy: Some(accuracy),
        }
    }
}

pub type StubProfile = BTreeMap<String, StubSpec>;

#[derive(Debug, thiserror::Error)]
#[error("stub profile for `{justice}`: {reason}")]
pub struct StubProfileError {
    pub justice: String,
    pub reason: String,
}

/// Uniform value in `[0, 1)` from SHA-256 of `(seed, justice, case)`.
pub fn hash_unit(seed: u64, justice_id: &str, case_id: &str) -> f64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(justice_id.as_bytes());
    hasher.update([0x1f]);
    hasher.update(case_id.as_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    (u64::from_be_bytes(head) >> 11) as f64 / (1u64 << 53) as f64
}

/// Deterministic stand-in for a bench of trained models.
///
/// Without an accuracy target the vote for `(justice, case)` is a hashed coin
/// flip. With a target and known dispositions, the justice ranks the known
/// cases by hash and answers the first `round(accuracy · n)` correctly, so
/// the accuracy over the known set is exact up to rounding. The completion is
/// a templated opinion followed by the decision pair, in the continuation
/// form an inference stub expects.
#[derive(Debug)]
pub struct StubBackend {
    profile: StubProfile,
    truth: HashMap<String, Decision>,
    /// Known cases each accuracy-targeted justice gets right.
    correct: HashMap<String, HashSet<String>>,
    calls: AtomicUsize,
}

impl StubBackend {
    pub fn new(profile: StubProfile) -> Result<Self, StubProfileError> {
        for (justice, spec) in &profile {
            let check = |name: &str, v: f64| {
                if (0.0..=1.0).contains(&v) {
                    Ok(())
                } else {
                    Err(StubProfileError {
                        justice: justice.clone(),
                        reason: format!("{name} {v} outside [0, 1]"),
                    })
                }
            };
            check("approve_rate", spec.approve_rate)?;
            if let Some(acc) = spec.accuracy {
                check("accuracy", acc)?;
            }
        }
        Ok(Self {
            profile,
            truth: HashMap::new(),
            correct: HashMap::new(),
            calls: AtomicUsize::new(0),
        })
    }

    fn assign_correct(&mut self) {
        self.correct.clear();
        if self.truth.is_empty() {
            return;
        }
        for (justice, spec) in &self.profile {
            let Some(acc) = spec.accuracy else { continue };
            let mut ranked: Vec<(f64, &String)> = self
                .truth
                .keys()
                .map(|case| (hash_unit(spec.seed, justice, case), case))
                .collect();
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
            let quota = (acc * ranked.len() as f64).round() as usize;
            let set = ranked.into_iter().take(quota).map(|(_, c)| c.clone()).collect();
            self.correct.insert(justice.clone(), set);
        }
    }

    /// Known dispositions, used by specs with an accuracy target.
    pub fn with_truth<I>(mut self, truth: I) -> Self
    where
        I: IntoIterator<Item = (String, Decision)>,
    {
        self.truth.extend(truth);
        self.assign_correct();
        self
    }

    /// Adds `offset` to every justice seed.
    pub fn reseeded(mut self, offset: u64) -> Self {
        for spec in self.profile.values_mut() {
            spec.seed = spec.seed.wrapping_add(offset);
        }
        self.assign_correct();
        self
    }

    pub fn profile(&self) -> &StubProfile {
        &self.profile
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn decide(&self, justice_id: &str, case_id: &str) -> Option<Decision> {
        let spec = self.profile.get(justice_id)?;
        let u = hash_unit(spec.seed, justice_id, case_id);
        let decision = match (spec.accuracy, self.truth.get(case_id)) {
            (Some(_), Some(&truth)) => {
                let hit = self.correct.get(justice_id).is_some_and(|s| s.contains(case_id));
                if hit {
                    truth
                } else {
                    truth.opposite()
                }
            }
            _ if u < spec.approve_rate => Decision::Approve,
            _ => Decision::Deny,
        };
        Some(decision)
    }

    pub fn completion(justice_id: &str, case_id: &str, decision: Decision) -> String {
        let verb = match decision {
            Decision::Approve => "grant",
            Decision::Deny => "deny",
        };
        let opinion = format!(
            "Having reviewed case {case_id}, {} would {verb} the relief the appellant seeks.",
            display_name(justice_id)
        );
        let opinion = escape_value("opinion", &opinion).unwrap_or_else(|_| "Opinion withheld.".into());
        format!("{opinion}',\n 'decision': '{}'\n}}\n", decision.as_token())
    }
}

impl Backend for StubBackend {
    fn generate(&self, call: &GenerateCall<'_>) -> Result<GenerateResponse, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let decision = self.decide(call.justice_id, call.case_id).ok_or_else(|| {
            BackendError::Connection(format!("no stub agent for `{}`", call.justice_id))
        })?;
        Ok(GenerateResponse {
            text: Self::completion(call.justice_id, call.case_id, decision),
            prompt_tokens: Some(TokenEstimator::BytesDiv4.estimate(&call.request.prompt) as u64),
        })
    }

    fn health(&self, justice_id: &str) -> Result<HealthStatus, BackendError> {
        if self.profile.contains_key(justice_id) {
            Ok(HealthStatus {
                status: "ok".into(),
                justice_id: justice_id.into(),
            })
        } else {
            Err(BackendError::Connection(format!("no stub agent for `{justice_id}`")))
        }
    }
}

/// One scripted reply.
#[derive(Debug, Clone, PartialEq)]
pub enum ScriptStep {
    /// Well-formed completion with this decision.
    Valid(Decision),
    /// Text with no decision key.
    Garbage,
    /// Raw text returned verbatim.
    Text(String),
    Fail(BackendError),
}

/// Replays a fixed sequence of replies per justice, repeating the last step
/// once the script runs out. Counts every call.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    scripts: HashMap<String, Vec<ScriptStep>>,
    fallback: Vec<ScriptStep>,
    calls: Mutex<HashMap<String, usize>>,
    total: AtomicUsize,
}

impl ScriptedBackend {
    /// Every justice follows `script`.
    pub fn uniform(script: Vec<ScriptStep>) -> Self {
        Self {
            fallback: script,
            ..Self::default()
        }
    }

    pub fn with_script(mut self, justice_id: &str, script: Vec<ScriptStep>) -> Self {
        self.scripts.insert(justice_id.to_string(), script);
        self
    }

    pub fn calls_for(&self, justice_id: &str) -> usize {
        self.calls.lock().unwrap().get(justice_id).copied().unwrap_or(0)
    }

    pub fn total_calls(&self) -> usize {
        self.total.load(Ordering::SeqCst)
    }
}

impl Backend for ScriptedBackend {
    fn generate(&self, call: &GenerateCall<'_>) -> Result<GenerateResponse, BackendError> {
        self.total.fetch_add(1, Ordering::SeqCst);
        let index = {
            let mut calls = self.calls.lock().unwrap();
            let n = calls.entry(call.justice_id.to_string()).or_insert(0);
            *n += 1;
            *n - 1
        };
        let script = self.scripts.get(call.justice_id).unwrap_or(&self.fallback);
        let step = script
            .get(index)
            .or_else(|| script.last())
            .cloned()
            .unwrap_or(ScriptStep::Garbage);
        let text = match step {
            ScriptStep::Valid(d) => StubBackend::completion(call.justice_id, call.case_id, d),
            ScriptStep::Garbage => "the the the the".to_string(),
            ScriptStep::Text(t) => t,
            ScriptStep::Fail(e) => return Err(e),
        };
        Ok(GenerateResponse {
            text,
            prompt_tokens: None,
        })
    }

    fn health(&self, justice_id: &str) -> Result<HealthStatus, BackendError> {
        Ok(HealthStatus {
            status: "ok".into(),
            justice_id: justice_id.into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::parse_completion;

    fn call<'a>(justice: &'a str, case: &'a str) -> GenerateCall<'a> {
        GenerateCall {
            justice_id: justice,
            case_id: case,
            request: super::super::backend::GenerateRequest {
                prompt: "{\n 'opinion': '".into(),
                temperature: 0.5,
                max_new_tokens: 1000,
                seed: Some(3),
            },
        }
    }

    #[test]
    fn degenerate_rates() {
        let profile: StubProfile = [
            ("A".to_string(), StubSpec::new(1.0, 1)),
            ("B".to_string(), StubSpec::new(0.0, 1)),
        ]
        .into();
        let stub = StubBackend::new(profile).unwrap();
        for i in 0..200 {
            let case = format!("case-{i}");
            let a = parse_completion(&stub.generate(&call("A", &case)).unwrap().text).unwrap();
            let b = parse_completion(&stub.generate(&call("B", &case)).unwrap().text).unwrap();
            assert_eq!(a.decision, Decision::Approve);
            assert_eq!(b.decision, Decision::Deny);
        }
        assert_eq!(stub.calls(), 400);
    }

    #[test]
    fn same_inputs_same_output() {
        let stub = StubBackend::new([("A".to_string(), StubSpec::new(0.5, 9))].into()).unwrap();
        let first = stub.generate(&call("A", "x")).unwrap();
        let second = stub.generate(&call("A", "x")).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn accuracy_target_is_exact_on_known_cases() {
        let truth: Vec<(String, Decision)> = (0..96)
            .map(|i| (format!("c{i}"), if i % 3 == 0 { Decision::Approve } else { Decision::Deny }))
            .collect();
        let stub = StubBackend::new([("A".to_string(), StubSpec::with_accuracy(0.65, 4))].into())
            .unwrap()
            .with_truth(truth.clone());
        let hits = truth
            .iter()
            .filter(|(c, d)| stub.decide("A", c) == Some(*d))
            .count();
        assert_eq!(hits, 62); // round(0.65 * 96)
        let reseeded = stub.reseeded(1);
        let hits_after = truth
            .iter()
            .filter(|(c, d)| reseeded.decide("A", c) == Some(*d))
            .count();
        assert_eq!(hits_after, 62);
    }

    #[test]
    fn rejects_out_of_range_rates() {
        assert!(StubBackend::new([("A".to_string(), StubSpec::new(1.5, 0))].into()).is_err());
        assert!(StubBackend::new([("A".to_string(), StubSpec::with_accuracy(-0.1, 0))].into()).is_err());
    }

    #[test]
    fn unknown_justice_is_unavailable() {
        let stub = StubBackend::new(StubProfile::new()).unwrap();
        assert!(stub.health("A").is_err());
        assert!(matches!(stub.generate(&call("A", "x")), Err(BackendError::Connection(_))));
    }

    #[test]
    fn scripted_replays_then_repeats_last() {
        let backend = ScriptedBackend::uniform(vec![ScriptStep::Garbage, ScriptStep::Valid(Decision::Deny)]);
        assert_eq!(backend.generate(&call("A", "x")).unwrap().text, "the the the the");
        for _ in 0..3 {
            let text = backend.generate(&call("A", "x")).unwrap().text;
            assert_eq!(parse_completion(&text).unwrap().decision, Decision::Deny);
        }
        assert_eq!(backend.calls_for("A"), 4);
        assert_eq!(backend.total_calls(), 4);
    }
}
