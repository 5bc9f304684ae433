use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::corpus::{Case, JusticeVote};

/// Product-moment correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(MetricsError::InsufficientData {
            needed: 2,
            got: x.len(),
        });
    }
    let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
    if constant(x) || constant(y) {
        return Err(MetricsError::ZeroVariance);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Symmetric justice × justice matrix. `None` marks an undefined cell
/// (fewer than two shared cases, or no variance on a side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub justices: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    /// Cases on which both justices voted.
    pub shared_cases: Vec<Vec<usize>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.justices.iter().position(|j| j == a)?;
        let k = self.justices.iter().position(|j| j == b)?;
        self.values[i][k]
    }

    /// CSV with a header row of justice ids; undefined cells are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("justice");
        for j in &self.justices {
            out.push(',');
            out.push_str(j);
        }
        out.push('\n');
        for (j, row) in self.justices.iter().zip(&self.values) {
            out.push_str(j);
            for cell in row {
                out.push(',');
                if let Some(v) = cell {
                    let _ = write!(out, "{v:.6}");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Fixed-width text table with a shade glyph per cell.
    pub fn render_heat_table(&self) -> String {
        let width = self.justices.iter().map(|j| j.len()).max().unwrap_or(0).max(7);
        let mut out = format!("{:width$}", "");
        for j in &self.justices {
            let _ = write!(out, " {:>7}", truncate(j, 7));
        }
        out.push('\n');
        for (j, row) in self.justices.iter().zip(&self.values) {
            let _ = write!(out, "{j:width$}");
            for cell in row {
                match cell {
                    Some(v) => {
                        let _ = write!(out, " {:>+5.2}{} ", v, shade(*v));
                    }
                    None => out.push_str("      . "),
                }
            }
            out.push('\n');
        }
        out.push_str("shade: ' ' r<0  '░' 0-0.25  '▒' 0.25-0.5  '▓' 0.5-0.75  '█' >=0.75\n");
        out
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((idx, _)) => &s[..idx],
        None => s,
    }
}

fn shade(v: f64) -> char {
    match v {
        v if v < 0.0 => ' ',
        v if v < 0.25 => '░',
        v if v < 0.5 => '▒',
        v if v < 0.75 => '▓',
        _ => '█',
    }
}

/// Pairwise phi coefficients between bench members' binary vote vectors,
/// Approve = 1, over the cases both took part in.
pub fn vote_correlation_matrix(
    votes: &[JusticeVote],
    bench: &[String],
) -> Result<CorrelationMatrix, MetricsError> {
    if bench.len() < 2 {
        return Err(MetricsError::InsufficientData {
            needed: 2,
            got: bench.len(),
        });
    }
    let mut by_justice: HashMap<&str, HashMap<&str, f64>> = HashMap::new();
    for v in votes {
        if let Some(d) = v.vote.decision() {
            by_justice
                .entry(v.justice_id.as_str())
                .or_default()
                .insert(v.case_id.as_str(), d.indicator());
        }
    }
    let empty = HashMap::new();
    let vectors: Vec<&HashMap<&str, f64>> = bench
        .iter()
        .map(|j| by_justice.get(j.as_str()).unwrap_or(&empty))
        .collect();

    let n = bench.len();
    let mut values = vec![vec![None; n]; n];
    let mut shared_cases = vec![vec![0; n]; n];
    for i in 0..n {
        for k in i..n {
            let mut shared: Vec<&&str> = vectors[i]
                .keys()
                .filter(|c| vectors[k].contains_key(**c))
                .collect();
            shared.sort();
            let x: Vec<f64> = shared.iter().map(|c| vectors[i][**c]).collect();
            let y: Vec<f64> = shared.iter().map(|c| vectors[k][**c]).collect();
            let r = pearson_r(&x, &y).ok().map(|r| if i == k { 1.0 } else { r });
            values[i][k] = r;
            values[k][i] = r;
            shared_cases[i][k] = shared.len();
            shared_cases[k][i] = shared.len();
        }
    }
    Ok(CorrelationMatrix {
        justices: bench.to_vec(),
        values,
        shared_cases,
    })
}

/// Share of precedent-altering cases decided within `years` (inclusive) in
/// which each justice dissented from the majority. Justices with no such
/// participation are omitted.
pub fn anti_overturn_frequency(
    cases: &[Case],
    votes: &[JusticeVote],
    years: (i32, i32),
) -> BTreeMap<String, f64> {
    let altering: HashSet<&str> = cases
        .iter()
        .filter(|c| {
            let y = c.decided_date.year();
            c.precedent_altered && y >= years.0 && y <= years.1
        })
        .map(|c| c.case_id.as_str())
        .collect();
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for v in votes {
        let Some(with_majority) = v.with_majority else {
            continue;
        };
        if !altering.contains(v.case_id.as_str()) {
            continue;
        }
        let entry = counts.entry(v.justice_id.clone()).or_default();
        entry.1 += 1;
        if !with_majority {
            entry.0 += 1;
        }
    }
    counts
        .into_iter()
        .map(|(j, (against, total))| (j, against as f64 / total as f64))
        .collect()
}

/// Pearson r between per-justice accuracy and anti-overturn frequency, over
/// justices in id order.
pub fn alignment_correlation(
    per_justice_accuracy: &BTreeMap<String, f64>,
    anti_overturn_freq: &BTreeMap<String, f64>,
) -> Result<f64, MetricsError> {
    if !per_justice_accuracy.keys().eq(anti_overturn_freq.keys()) {
        let a: Vec<&String> = per_justice_accuracy.keys().collect();
        let b: Vec<&String> = anti_overturn_freq.keys().collect();
        return Err(MetricsError::KeyMismatch(format!("{a:?} vs {b:?}")));
    }
    if per_justice_accuracy.len() < 3 {
        return Err(MetricsError::InsufficientJustices(per_justice_accuracy.len()));
    }
    let x: Vec<f64> = per_justice_accuracy.values().copied().collect();
    let y: Vec<f64> = anti_overturn_freq.values().copied().collect();
    pearson_r(&x, &y)
}
