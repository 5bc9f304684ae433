use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::training::build_base_training_set;
use super::{same_court, Case, CorpusError, JusticeVote, OpinionDoc};

#[derive(Debug, Clone)]
pub struct SplitOptions {
    pub court_tag: String,
    pub test_size: usize,
    pub seed: u64,
    /// Inclusive range of opinion years for the per-justice sets.
    pub year_range: (i32, i32),
}

impl Default for SplitOptions {
    fn default() -> Self {
        Self {
            court_tag: crate::justices::ROBERTS_IV_TAG.to_string(),
            test_size: 96,
            seed: 0,
            year_range: (2003, 2016),
        }
    }
}

/// Held-out test docket plus the two training stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train_base: Vec<String>,
    pub train_per_justice: BTreeMap<String, Vec<OpinionDoc>>,
    pub test: Vec<String>,
}

impl CorpusSplit {
    /// No test case appears in any training stage.
    pub fn is_disjoint(&self) -> bool {
        let test: HashSet<&str> = self.test.iter().map(String::as_str).collect();
        self.train_base.iter().all(|id| !test.contains(id.as_str()))
            && self
                .train_per_justice
                .values()
                .flatten()
                .all(|o| !test.contains(o.case_id.as_str()))
    }

    pub fn test_ids(&self) -> HashSet<String> {
        self.test.iter().cloned().collect()
    }
}

/// Seeded sample of `test_size` cases from the court (those with a defined
/// disposition); everything sampled is removed from both training stages.
pub fn split_corpus(
    cases: &[Case],
    votes: &[JusticeVote],
    opinions: &[OpinionDoc],
    bench: &[String],
    options: &SplitOptions,
) -> Result<CorpusSplit, CorpusError> {
    let mut eligible: Vec<&str> = cases
        .iter()
        .filter(|c| same_court(&c.natural_court, &options.court_tag) && c.disposition.is_some())
        .map(|c| c.case_id.as_str())
        .collect();
    eligible.sort_unstable();
    if eligible.is_empty() {
        return Err(CorpusError::EmptyResult(format!(
            "no decided cases for court `{}`",
            options.court_tag
        )));
    }
    if eligible.len() < options.test_size {
        log::warn!(
            "only {} eligible cases for a test set of {}",
            eligible.len(),
            options.test_size
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    eligible.shuffle(&mut rng);
    let mut test: Vec<String> = eligible
        .iter()
        .take(options.test_size)
        .map(|s| s.to_string())
        .collect();
    test.sort();
    let held_out: HashSet<&str> = test.iter().map(String::as_str).collect();

    let train_base = build_base_training_set(cases, votes, &options.court_tag)?
        .into_iter()
        .filter(|id| !held_out.contains(id.as_str()))
        .collect();

    let (from, to) = options.year_range;
    let mut train_per_justice: BTreeMap<String, Vec<OpinionDoc>> =
        bench.iter().map(|j| (j.clone(), Vec::new())).collect();
    for opinion in opinions {
        if held_out.contains(opinion.case_id.as_str())
            || opinion.written_year < from
            || opinion.written_year > to
        {
            continue;
        }
        if let Some(set) = train_per_justice.get_mut(&opinion.justice_id) {
            set.push(opinion.clone());
        }
    }
    for set in train_per_justice.values_mut() {
        set.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    }

    Ok(CorpusSplit {
        train_base,
        train_per_justice,
        test,
    })
}
