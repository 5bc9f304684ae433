//! Brute-force reference implementations and random fixtures shared by the
//! metric tests. The oracles use textbook formulas over explicit contingency
//! tables and pair enumeration, independent of the library's code paths.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scotus_sim::corpus::JusticeVote;
use scotus_sim::metrics::{LabeledItem, LabeledPredictions};
use scotus_sim::{Decision, Vote};

pub fn oracle_accuracy(pred: &[bool], actual: &[bool]) -> Option<f64> {
    if pred.is_empty() {
        return None;
    }
    let hits = pred.iter().zip(actual).filter(|(p, a)| p == a).count();
    Some(hits as f64 / pred.len() as f64)
}

/// κ from the 2×2 table `[[tp, fp], [fn, tn]]` in probability form.
pub fn oracle_kappa(pred: &[bool], actual: &[bool]) -> Option<f64> {
    let n = pred.len();
    if n == 0 {
        return None;
    }
    let mut table = [[0usize; 2]; 2];
    for (p, a) in pred.iter().zip(actual) {
        table[usize::from(!*p)][usize::from(!*a)] += 1;
    }
    let total = n as f64;
    let p_o = (table[0][0] + table[1][1]) as f64 / total;
    let row = |r: usize| (table[r][0] + table[r][1]) as f64 / total;
    let col = |c: usize| (table[0][c] + table[1][c]) as f64 / total;
    let p_e = row(0) * col(0) + row(1) * col(1);
    let constant_same = (table[0][1] + table[1][0] == 0) && (row(0) == 1.0 || row(1) == 1.0);
    if constant_same {
        // chance agreement of exactly one; the library reports 0 by convention
        return Some(0.0);
    }
    Some((p_o - p_e) / (1.0 - p_e))
}

/// Pair enumeration: P(score_pos > score_neg) + ½ P(tie).
pub fn oracle_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let (mut wins, mut pairs) = (0.0, 0usize);
    for (i, &pi) in positive.iter().enumerate() {
        if !pi {
            continue;
        }
        for (j, &pj) in positive.iter().enumerate() {
            if pj {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    (pairs > 0).then(|| wins / pairs as f64)
}

/// Computational formula `(nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²))`.
pub fn oracle_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if x.iter().all(|a| *a == x[0]) || y.iter().all(|b| *b == y[0]) {
        return None;
    }
    Some((n * sxy - sx * sy) / (vx * vy).sqrt())
}

/// Phi from the 2×2 table of two binary vote vectors.
pub fn oracle_phi(x: &[bool], y: &[bool]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let (mut a, mut b, mut c, mut d) = (0f64, 0f64, 0f64, 0f64);
    for (p, q) in x.iter().zip(y) {
        match (p, q) {
            (true, true) => a += 1.0,
            (true, false) => b += 1.0,
            (false, true) => c += 1.0,
            (false, false) => d += 1.0,
        }
    }
    let denom = (a + b) * (c + d) * (a + c) * (b + d);
    (denom > 0.0).then(|| (a * d - b * c) / denom.sqrt())
}

/// Pairwise phi over shared participation; the diagonal is 1 when the
/// justice's own vector has variance.
pub fn oracle_matrix(votes: &[JusticeVote], bench: &[String]) -> Vec<Vec<Option<f64>>> {
    let table: std::collections::HashMap<(&str, &str), Option<bool>> = votes
        .iter()
        .map(|v| {
            let vote = v.vote.decision().map(|d| d == Decision::Approve);
            ((v.justice_id.as_str(), v.case_id.as_str()), vote)
        })
        .collect();
    let lookup = |j: &str, case: &str| table.get(&(j, case)).copied().flatten();
    let mut cases: Vec<&str> = votes.iter().map(|v| v.case_id.as_str()).collect();
    cases.sort();
    cases.dedup();
    bench
        .iter()
        .map(|a| {
            bench
                .iter()
                .map(|b| {
                    let (mut x, mut y) = (Vec::new(), Vec::new());
                    for c in &cases {
                        if let (Some(p), Some(q)) = (lookup(a, c), lookup(b, c)) {
                            x.push(p);
                            y.push(q);
                        }
                    }
                    oracle_phi(&x, &y).map(|r| if a == b { 1.0 } else { r })
                })
                .collect()
        })
        .collect()
}

/// Cohen's d with explicit n−1 sample variances.
pub fn oracle_cohen_d(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let var = |g: &[f64]| {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        (m, g.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (g.len() - 1) as f64)
    };
    let (ma, va) = var(a);
    let (mb, vb) = var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0)).sqrt();
    let constant = |g: &[f64]| g.iter().all(|v| *v == g[0]);
    if constant(a) && constant(b) {
        return None;
    }
    Some((ma - mb) / pooled)
}

pub fn to_decision(b: bool) -> Decision {
    if b {
        Decision::Approve
    } else {
        Decision::Deny
    }
}

/// Random fixture with at most 50 items.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub pred: Vec<bool>,
    pub actual: Vec<bool>,
    /// Scores on a coarse grid so ties occur.
    pub scores: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub votes: Vec<JusticeVote>,
    pub bench: Vec<String>,
}

impl Fixture {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=50);
        let bias: f64 = rng.gen_range(0.05..0.95);
        let pred: Vec<bool> = (0..n).map(|_| rng.gen_bool(bias)).collect();
        let actual: Vec<bool> = pred
            .iter()
            .map(|&p| if rng.gen_bool(0.7) { p } else { rng.gen_bool(0.5) })
            .collect();
        let scores = (0..n).map(|_| rng.gen_range(0..=9) as f64 / 9.0).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y = x.iter().map(|v| 0.5 * v + rng.gen_range(-2.0..2.0)).collect();

        let n_justices = rng.gen_range(2..=10);
        let n_cases = rng.gen_range(1..=50);
        let bench: Vec<String> = (0..n_justices).map(|j| format!("J{j}")).collect();
        let mut votes = Vec::new();
        for c in 0..n_cases {
            for j in &bench {
                let roll: f64 = rng.gen();
                let vote = if roll < 0.1 {
                    Vote::Recused
                } else if roll < 0.55 {
                    Vote::Approve
                } else {
                    Vote::Deny
                };
                votes.push(JusticeVote {
                    case_id: format!("c{c:02}"),
                    justice_id: j.clone(),
                    vote,
                    with_majority: None,
                });
            }
        }
        Self {
            pred,
            actual,
            scores,
            x,
            y,
            votes,
            bench,
        }
    }

    pub fn labeled(&self) -> LabeledPredictions {
        let items = self
            .pred
            .iter()
            .zip(&self.actual)
            .enumerate()
            .map(|(i, (p, a))| LabeledItem::new(format!("case-{i}"), to_decision(*p), to_decision(*a)))
            .collect();
        LabeledPredictions::new(items, Some(self.scores.clone())).unwrap()
    }

    /// Group split for Cohen's d: x values where the prediction is positive
    /// against those where it is not.
    pub fn groups(&self) -> (Vec<f64>, Vec<f64>) {
        let a = self.x.iter().zip(&self.pred).filter(|(_, p)| **p).map(|(v, _)| *v).collect();
        let b = self.x.iter().zip(&self.pred).filter(|(_, p)| !**p).map(|(v, _)| *v).collect();
        (a, b)
    }
}

/// Compares an oracle value with a library result at absolute tolerance.
pub fn agrees<E: std::fmt::Debug>(oracle: Option<f64>, lib: Result<f64, E>, tol: f64) -> Result<(), String> {
    match (oracle, lib) {
        (Some(o), Ok(l)) if (o - l).abs() <= tol => Ok(()),
        (None, Err(_)) => Ok(()),
        (o, l) => Err(format!("oracle {o:?} vs library {l:?}")),
    }
}

pub fn matrix_agrees(oracle: &[Vec<Option<f64>>], lib: &[Vec<Option<f64>>], tol: f64) -> Result<(), String> {
    for (i, (orow, lrow)) in oracle.iter().zip(lib).enumerate() {
        for (k, (o, l)) in orow.iter().zip(lrow).enumerate() {
            let ok = match (o, l) {
                (Some(o), Some(l)) => (o - l).abs() <= tol,
                (None, None) => true,
                _ => false,
            };
            if !ok {
                return Err(format!("cell ({i},{k}): oracle {o:?} vs library {l:?}"));
            }
        }
    }
    Ok(())
}
