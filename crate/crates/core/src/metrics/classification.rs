use super::{LabeledPredictions, MetricsError};
use crate::Decision;

pub fn accuracy(preds: &LabeledPredictions) -> Result<f64, MetricsError> {
    if preds.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let correct = preds.items().iter().filter(|i| i.predicted == i.actual).count();
    Ok(correct as f64 / preds.len() as f64)
}

/// Unweighted two-class Cohen's κ, `(p_o − p_e) / (1 − p_e)`.
///
/// Computed from integer counts as `(n·agree − Σ pred_c·act_c) / (n² − Σ pred_c·act_c)`.
/// When chance agreement is 1 (both sides constant on the same class) κ is 0.
pub fn cohen_kappa(preds: &LabeledPredictions) -> Result<f64, MetricsError> {
    if preds.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = preds.len() as u128;
    let (mut agree, mut pred_approve, mut act_approve) = (0u128, 0u128, 0u128);
    for item in preds.items() {
        agree += u128::from(item.predicted == item.actual);
        pred_approve += u128::from(item.predicted == Decision::Approve);
        act_approve += u128::from(item.actual == Decision::Approve);
    }
    let chance = pred_approve * act_approve + (n - pred_approve) * (n - act_approve);
    let denom = n * n - chance;
    if denom == 0 {
        return if agree == n {
            Ok(0.0)
        } else {
            Err(MetricsError::DegenerateMarginals {
                observed: agree as f64 / n as f64,
            })
        };
    }
    Ok(((n * agree) as f64 - chance as f64) / denom as f64)
}

/// Chance agreement implied by a reported accuracy and κ.
pub fn implied_chance_agreement(accuracy: f64, kappa: f64) -> Result<f64, MetricsError> {
    if kappa == 1.0 {
        return Err(MetricsError::DivisionByZero("kappa = 1"));
    }
    Ok((accuracy - kappa) / (1.0 - kappa))
}

/// Probability that a random positive outscores a random negative, ties
/// counted as one half, via midranks (Mann-Whitney U).
pub fn auc_from_scores(scores: &[f64], positive: &[bool]) -> Result<f64, MetricsError> {
    if scores.len() != positive.len() {
        return Err(MetricsError::LengthMismatch {
            left: scores.len(),
            right: positive.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(MetricsError::InvalidArgument("NaN score".into()));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start..end (0-based) share the midrank
        let midrank = (start + end + 1) as f64 / 2.0;
        let tied_pos = order[start..end].iter().filter(|&&i| positive[i]).count();
        rank_sum_pos += midrank * tied_pos as f64;
        start = end;
    }
    let n_pos_f = n_pos as f64;
    let u = rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0;
    Ok(u / (n_pos_f * n_neg as f64))
}

/// AUC of the item scores with actual Approve as the positive class.
pub fn roc_auc(preds: &LabeledPredictions) -> Result<f64, MetricsError> {
    let scores = preds.scores().ok_or(MetricsError::MissingScores)?;
    let positive: Vec<bool> = preds
        .items()
        .iter()
        .map(|i| i.actual == Decision::Approve)
        .collect();
    auc_from_scores(scores, &positive)
}
