use statrs::function::erf::erfc;

use super::MetricsError;

/// Standardized mean difference `(mean_a − mean_b) / s_pooled`, with the
/// pooled variance `((n_a−1)s_a² + (n_b−1)s_b²) / (n_a+n_b−2)`.
pub fn cohen_d(group_a: &[f64], group_b: &[f64]) -> Result<f64, MetricsError> {
    for g in [group_a, group_b] {
        if g.len() < 2 {
            return Err(MetricsError::InsufficientData {
                needed: 2,
                got: g.len(),
            });
        }
    }
    let constant = |g: &[f64]| g.iter().all(|v| *v == g[0]);
    if constant(group_a) && constant(group_b) {
        return Err(MetricsError::ZeroPooledVariance);
    }
    let mean = |g: &[f64]| g.iter().sum::<f64>() / g.len() as f64;
    let ss = |g: &[f64], m: f64| g.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    let (ma, mb) = (mean(group_a), mean(group_b));
    let dof = (group_a.len() + group_b.len() - 2) as f64;
    let pooled = ((ss(group_a, ma) + ss(group_b, mb)) / dof).sqrt();
    if pooled == 0.0 {
        return Err(MetricsError::ZeroPooledVariance);
    }
    Ok((ma - mb) / pooled)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Overlap of two unit-variance normals whose means are `d` apart:
/// `2·Φ(−|d|/2)`.
pub fn overlap_coefficient(d: f64) -> f64 {
    2.0 * normal_cdf(-d.abs() / 2.0)
}
