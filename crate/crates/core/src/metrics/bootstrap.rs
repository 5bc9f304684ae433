use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LabeledPredictions, MetricsError};

/// Linear-interpolated quantile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Percentile bootstrap over cases, resampled with replacement.
///
/// Resamples on which the metric is undefined (e.g. a single class for AUC)
/// are discarded; if more than half are discarded the interval is reported as
/// undefined.
pub fn bootstrap_ci<F>(
    metric_fn: F,
    preds: &LabeledPredictions,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<(f64, f64), MetricsError>
where
    F: Fn(&LabeledPredictions) -> Result<f64, MetricsError>,
{
    if preds.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if resamples < 100 {
        return Err(MetricsError::InvalidArgument(format!(
            "resamples must be >= 100, got {resamples}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(MetricsError::InvalidArgument(format!("level {level} outside (0, 1)")));
    }

    let n = preds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = vec![0usize; n];
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for slot in indices.iter_mut() {
            *slot = rng.gen_range(0..n);
        }
        if let Ok(v) = metric_fn(&preds.select(&indices)) {
            stats.push(v);
        }
    }
    if stats.len() * 2 < resamples {
        return Err(MetricsError::InvalidArgument(format!(
            "metric undefined on {} of {resamples} resamples",
            resamples - stats.len()
        )));
    }
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((percentile(&stats, tail), percentile(&stats, 1.0 - tail)))
}
