//! Seeded fixtures shared by the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scotus_sim::corpus::synthetic::{generate, SyntheticCorpus, SyntheticSpec};
use scotus_sim::court::{StubProfile, StubSpec};
use scotus_sim::justices::roberts_iv;
use scotus_sim::metrics::{LabeledItem, LabeledPredictions};
use scotus_sim::Decision;

fn decision(approve: bool) -> Decision {
    if approve {
        Decision::Approve
    } else {
        Decision::Deny
    }
}

/// `n` predictions that agree with the truth about 60% of the time, with
/// scores on a coarse grid so the AUC path sees ties.
pub fn predictions(n: usize, seed: u64) -> LabeledPredictions {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = Vec::with_capacity(n);
    let items = (0..n)
        .map(|i| {
            let actual = rng.gen_bool(0.55);
            let predicted = if rng.gen_bool(0.6) { actual } else { !actual };
            scores.push(rng.gen_range(0..=20) as f64 / 20.0);
            LabeledItem::new(format!("case-{i}"), decision(predicted), decision(actual))
        })
        .collect();
    LabeledPredictions::new(items, Some(scores)).expect("scores match items")
}

/// Two-bloc synthetic corpus with `n_cases` cases.
pub fn corpus(n_cases: usize, seed: u64) -> SyntheticCorpus {
    generate(&SyntheticSpec {
        n_cases,
        seed,
        ..SyntheticSpec::default()
    })
}

/// Stub profile for the nine Roberts IV justices at 60% accuracy.
pub fn stub_profile() -> StubProfile {
    roberts_iv()
        .into_iter()
        .enumerate()
        .map(|(i, j)| (j, StubSpec::with_accuracy(0.6, i as u64)))
        .collect()
}
