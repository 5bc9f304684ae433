use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    accuracy, alignment_correlation, bootstrap_ci, cohen_d, cohen_kappa, overlap_coefficient,
    roc_auc, vote_correlation_matrix, CorrelationMatrix, LabeledItem, LabeledPredictions,
    MetricsError,
};
use crate::corpus::{Case, JusticeVote};
use crate::court::SimulationOutcome;
use crate::justices::display_name;
use crate::{Decision, Vote};

pub const CI_LEVEL: f64 = 0.80;

/// Optional inputs to [`evaluate`].
#[derive(Debug, Clone)]
pub struct EvaluationExtras {
    /// Per-justice anti-overturn frequency; enables `alignment_r`.
    pub anti_overturn_freq: Option<BTreeMap<String, f64>>,
    /// Outcomes of a comparison system (e.g. a single agent); enables the
    /// effect-size comparison.
    pub baseline: Option<Vec<SimulationOutcome>>,
    /// Reports this d (and its overlap) instead of the measured one.
    pub effect_d_override: Option<f64>,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for EvaluationExtras {
    fn default() -> Self {
        Self {
            anti_overturn_freq: None,
            baseline: None,
            effect_d_override: None,
            resamples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JusticeMetrics {
    pub accuracy: f64,
    pub kappa: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub n_cases: usize,
    pub accuracy: f64,
    pub kappa: f64,
    pub effect_d: Option<f64>,
    pub overlap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Cases with a non-tied majority that entered the aggregate measures.
    pub n_cases: usize,
    /// Cases left out of the aggregate because of a tie or a failed run.
    pub excluded_cases: Vec<String>,
    pub accuracy: f64,
    pub kappa: f64,
    /// `None` when the evaluated cases hold a single class.
    pub auc: Option<f64>,
    pub per_justice: BTreeMap<String, JusticeMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment_r: Option<f64>,
    /// Cohen's d between predicted and actual decisions (Approve = 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineComparison>,
    /// Correlation of the simulated justices' votes.
    pub correlation_matrix: CorrelationMatrix,
    /// 80% percentile-bootstrap intervals keyed by metric name.
    pub ci80: BTreeMap<String, (f64, f64)>,
}

impl MetricsReport {
    /// Text table: justices by descending accuracy, then the aggregate rows.
    pub fn render_table(&self) -> String {
        let mut rows: Vec<(&String, &JusticeMetrics)> = self.per_justice.iter().collect();
        rows.sort_by(|a, b| b.1.accuracy.total_cmp(&a.1.accuracy).then_with(|| a.0.cmp(b.0)));
        let mut out = String::new();
        let _ = writeln!(out, "{:<24} {:>9} {:>7}", "Justice", "Accuracy", "κ");
        let _ = writeln!(out, "{}", "-".repeat(42));
        for (id, m) in rows {
            let _ = writeln!(
                out,
                "{:<24} {:>8.1}% {:>7.2}",
                display_name(id),
                m.accuracy * 100.0,
                m.kappa
            );
        }
        let _ = writeln!(out, "{}", "-".repeat(42));
        let _ = writeln!(
            out,
            "{:<24} {:>8.1}% {:>7.2}",
            "Aggregate",
            self.accuracy * 100.0,
            self.kappa
        );
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(out);
        let _ = writeln!(out, "cases evaluated: {} (excluded {})", self.n_cases, self.excluded_cases.len());
        let _ = writeln!(out, "AUC: {}", fmt_opt(self.auc));
        let _ = writeln!(out, "alignment r: {}", fmt_opt(self.alignment_r));
        let _ = writeln!(out, "Cohen's d: {}  overlap: {}", fmt_opt(self.effect_d), fmt_opt(self.overlap));
        if let Some(b) = &self.baseline {
            let _ = writeln!(
                out,
                "baseline: accuracy {:.1}%  κ {:.2}  d {}  overlap {}",
                b.accuracy * 100.0,
                b.kappa,
                fmt_opt(b.effect_d),
                fmt_opt(b.overlap)
            );
        }
        for (name, (lo, hi)) in &self.ci80 {
            let _ = writeln!(out, "80% CI {name}: [{lo:.3}, {hi:.3}]");
        }
        out
    }
}

/// Scored court-level predictions plus the ids of excluded cases.
type MajorityPredictions = (Vec<LabeledItem>, Vec<f64>, Vec<String>);
type MetricFn = fn(&LabeledPredictions) -> Result<f64, MetricsError>;

fn majority_predictions(
    outcomes: &[SimulationOutcome],
    truth: &HashMap<&str, Decision>,
) -> Result<MajorityPredictions, MetricsError> {
    let mut items = Vec::new();
    let mut scores = Vec::new();
    let mut excluded = Vec::new();
    for o in outcomes {
        let actual = *truth
            .get(o.case_id.as_str())
            .ok_or_else(|| MetricsError::MissingTruth(o.case_id.clone()))?;
        match (o.majority.decision(), o.tally.approve_margin()) {
            (Some(predicted), Some(margin)) => {
                items.push(LabeledItem::new(o.case_id.clone(), predicted, actual));
                scores.push(margin);
            }
            _ => excluded.push(o.case_id.clone()),
        }
    }
    Ok((items, scores, excluded))
}

fn indicators(items: &[LabeledItem]) -> (Vec<f64>, Vec<f64>) {
    items
        .iter()
        .map(|i| (i.predicted.indicator(), i.actual.indicator()))
        .unzip()
}

/// Assembles the full report for a docket run against the true dispositions.
pub fn evaluate(
    outcomes: &[SimulationOutcome],
    truth: &[Case],
    extras: &EvaluationExtras,
) -> Result<MetricsReport, MetricsError> {
    if outcomes.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let truth: HashMap<&str, Decision> = truth
        .iter()
        .filter_map(|c| c.disposition.map(|d| (c.case_id.as_str(), d)))
        .collect();

    let (items, scores, excluded_cases) = majority_predictions(outcomes, &truth)?;
    if items.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let preds = LabeledPredictions::new(items, Some(scores))?;
    let acc = accuracy(&preds)?;
    let kappa = cohen_kappa(&preds)?;
    let auc = roc_auc(&preds).ok();

    let mut per_justice_items: BTreeMap<String, Vec<LabeledItem>> = BTreeMap::new();
    let mut simulated_votes = Vec::new();
    for o in outcomes {
        let actual = truth[o.case_id.as_str()];
        for (justice, result) in &o.per_justice {
            per_justice_items
                .entry(justice.clone())
                .or_default()
                .push(LabeledItem::new(o.case_id.clone(), result.decision, actual));
            simulated_votes.push(JusticeVote {
                case_id: o.case_id.clone(),
                justice_id: justice.clone(),
                vote: Vote::from(result.decision),
                with_majority: Some(o.majority.decision() == Some(result.decision)),
            });
        }
    }
    let mut per_justice = BTreeMap::new();
    for (justice, items) in per_justice_items {
        let n = items.len();
        let p = LabeledPredictions::new(items, None)?;
        per_justice.insert(
            justice,
            JusticeMetrics {
                accuracy: accuracy(&p)?,
                kappa: cohen_kappa(&p)?,
                n,
            },
        );
    }

    let alignment_r = match &extras.anti_overturn_freq {
        Some(freq) => {
            let acc_map: BTreeMap<String, f64> = per_justice
                .iter()
                .filter(|(j, _)| freq.contains_key(*j))
                .map(|(j, m)| (j.clone(), m.accuracy))
                .collect();
            let freq_map: BTreeMap<String, f64> = freq
                .iter()
                .filter(|(j, _)| acc_map.contains_key(*j))
                .map(|(j, v)| (j.clone(), *v))
                .collect();
            match alignment_correlation(&acc_map, &freq_map) {
                Ok(r) => Some(r),
                Err(e) => {
                    log::warn!("alignment r undefined: {e}");
                    None
                }
            }
        }
        None => None,
    };

    let measured_d = || {
        let (pred, actual) = indicators(preds.items());
        cohen_d(&pred, &actual)
            .map_err(|e| log::warn!("effect size undefined: {e}"))
            .ok()
    };
    let effect_d = match (extras.effect_d_override, &extras.baseline) {
        (Some(d), _) => Some(d),
        (None, Some(_)) => measured_d(),
        (None, None) => None,
    };
    let overlap = effect_d.map(overlap_coefficient);

    let baseline = match &extras.baseline {
        Some(base) => {
            let (items, _, _) = majority_predictions(base, &truth)?;
            if items.is_empty() {
                return Err(MetricsError::EmptyInput);
            }
            let (pred, actual) = indicators(&items);
            let d = cohen_d(&pred, &actual).ok();
            let p = LabeledPredictions::new(items, None)?;
            Some(BaselineComparison {
                n_cases: p.len(),
                accuracy: accuracy(&p)?,
                kappa: cohen_kappa(&p)?,
                effect_d: d,
                overlap: d.map(overlap_coefficient),
            })
        }
        None => None,
    };

    let bench: Vec<String> = per_justice.keys().cloned().collect();
    let correlation_matrix = if bench.len() >= 2 {
        vote_correlation_matrix(&simulated_votes, &bench)?
    } else {
        CorrelationMatrix {
            justices: bench.clone(),
            values: vec![vec![None; bench.len()]; bench.len()],
            shared_cases: vec![vec![0; bench.len()]; bench.len()],
        }
    };

    let mut ci80 = BTreeMap::new();
    let metric_fns: [(&str, MetricFn); 3] =
        [("accuracy", accuracy), ("kappa", cohen_kappa), ("auc", roc_auc)];
    for (offset, (name, f)) in metric_fns.into_iter().enumerate() {
        let seed = extras.seed.wrapping_add(offset as u64);
        match bootstrap_ci(f, &preds, CI_LEVEL, extras.resamples, seed) {
            Ok(ci) => {
                ci80.insert(name.to_string(), ci);
            }
            Err(e) => log::warn!("no {name} interval: {e}"),
        }
    }

    Ok(MetricsReport {
        n_cases: preds.len(),
        excluded_cases,
        accuracy: acc,
        kappa,
        auc,
        per_justice,
        alignment_r,
        effect_d,
        overlap,
        baseline,
        correlation_matrix,
        ci80,
    })
}
