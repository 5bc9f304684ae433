use std::fmt;
use std::sync::Arc;

use super::codec::{serialize_prompt, Mode};
use super::{PromptError, PromptRecord};

/// Exact token counts supplied by a backend's tokenizer.
pub trait TokenCounter: Send + Sync {
    fn count_tokens(&self, text: &str) -> usize;
}

impl<F> TokenCounter for F
where
    F: Fn(&str) -> usize + Send + Sync,
{
    fn count_tokens(&self, text: &str) -> usize {
        self(text)
    }
}

#[derive(Clone, Default)]
pub enum TokenEstimator {
    /// `ceil(utf8_bytes / 4)`.
    #[default]
    BytesDiv4,
    /// `ceil(whitespace_words * 1.3)`.
    WhitespaceWordsX13,
    BackendReported(Arc<dyn TokenCounter>),
}

impl fmt::Debug for TokenEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenEstimator::BytesDiv4 => f.write_str("BytesDiv4"),
            TokenEstimator::WhitespaceWordsX13 => f.write_str("WhitespaceWordsX13"),
            TokenEstimator::BackendReported(_) => f.write_str("BackendReported"),
        }
    }
}

impl TokenEstimator {
    pub fn estimate(&self, text: &str) -> usize {
        match self {
            TokenEstimator::BytesDiv4 => text.len().div_ceil(4),
            TokenEstimator::WhitespaceWordsX13 => (text.split_whitespace().count() * 13).div_ceil(10),
            TokenEstimator::BackendReported(counter) => counter.count_tokens(text),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TokenBudget {
    pub max_tokens: usize,
    pub estimator: TokenEstimator,
}

impl Default for TokenBudget {
    fn default() -> Self {
        Self {
            max_tokens: 1000,
            estimator: TokenEstimator::BytesDiv4,
        }
    }
}

impl TokenBudget {
    pub fn new(max_tokens: usize) -> Self {
        Self {
            max_tokens,
            ..Self::default()
        }
    }

    pub fn with_estimator(mut self, estimator: TokenEstimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn estimate(&self, text: &str) -> usize {
        self.estimator.estimate(text)
    }

    /// Estimated size of the record in the mode its fields imply.
    pub fn estimate_record(&self, record: &PromptRecord) -> Result<usize, PromptError> {
        Ok(self.estimate(&serialize_prompt(record, mode_of(record))?))
    }
}

fn mode_of(record: &PromptRecord) -> Mode {
    if record.opinion.is_some() || record.decision.is_some() {
        Mode::Training
    } else {
        Mode::Inference
    }
}

/// Shrinks a record until its serialized form fits the budget.
///
/// The opinion is cut first, then the topic. Cuts land on sentence ends when
/// any sentence-aligned prefix fits, otherwise on a character boundary; each
/// truncated field keeps at least one character. Issue, seeking and decision
/// are never touched. Records already within budget come back unchanged.
pub fn fit_to_budget(record: &PromptRecord, budget: &TokenBudget) -> Result<PromptRecord, PromptError> {
    if budget.max_tokens == 0 {
        return Err(PromptError::InvalidBudget("max_tokens must be positive".into()));
    }
    let fits = |r: &PromptRecord| -> Result<bool, PromptError> {
        Ok(budget.estimate_record(r)? <= budget.max_tokens)
    };
    if fits(record)? {
        return Ok(record.clone());
    }

    let mut minimal = record.clone();
    minimal.topic = first_char(&record.topic);
    minimal.opinion = record.opinion.as_deref().map(first_char);
    if !fits(&minimal)? {
        return Err(PromptError::BudgetImpossible {
            max_tokens: budget.max_tokens,
            required: budget.estimate_record(&minimal)?,
        });
    }

    let mut out = record.clone();
    if let Some(opinion) = record.opinion.as_deref() {
        let with_opinion = |prefix: &str| {
            let mut r = out.clone();
            r.opinion = Some(prefix.to_string());
            r
        };
        let cut = longest_fitting_prefix(opinion, |p| fits(&with_opinion(p)))?;
        out.opinion = Some(cut.unwrap_or_else(|| first_char(opinion)));
        if fits(&out)? {
            return Ok(out);
        }
    }

    let with_topic = |prefix: &str| {
        let mut r = out.clone();
        r.topic = prefix.to_string();
        r
    };
    let cut = longest_fitting_prefix(&record.topic, |p| fits(&with_topic(p)))?;
    out.topic = cut.unwrap_or_else(|| first_char(&record.topic));
    Ok(out)
}

fn first_char(s: &str) -> String {
    s.chars().next().map(String::from).unwrap_or_default()
}

/// Longest non-empty prefix accepted by `fits`, preferring sentence ends.
/// Relies on `fits` being monotone in prefix length.
fn longest_fitting_prefix<F>(text: &str, fits: F) -> Result<Option<String>, PromptError>
where
    F: Fn(&str) -> Result<bool, PromptError>,
{
    let prefix = |end: usize| text[..end].trim_end().to_string();

    let sentence_ends = sentence_boundaries(text);
    if let Some(end) = last_fitting(&sentence_ends, |&end| fits(&prefix(end)))? {
        return Ok(Some(prefix(end)));
    }

    let char_ends: Vec<usize> = text
        .char_indices()
        .map(|(i, c)| i + c.len_utf8())
        .filter(|&end| !prefix(end).is_empty())
        .collect();
    Ok(last_fitting(&char_ends, |&end| fits(&prefix(end)))?.map(prefix))
}

/// Binary search for the last element satisfying a monotone predicate.
fn last_fitting<T: Copy, F>(items: &[T], pred: F) -> Result<Option<T>, PromptError>
where
    F: Fn(&T) -> Result<bool, PromptError>,
{
    let (mut lo, mut hi) = (0usize, items.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(&items[mid])? {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(lo.checked_sub(1).map(|i| items[i]))
}

/// Byte offsets just past each `.`, `!` or `?` that ends a sentence.
fn sentence_boundaries(text: &str) -> Vec<usize> {
    let mut ends = Vec::new();
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if matches!(c, '.' | '!' | '?') {
            let at_break = match iter.peek() {
                None => true,
                Some(&(_, next)) => next.is_whitespace(),
            };
            if at_break {
                ends.push(i + c.len_utf8());
            }
        }
    }
    ends
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Decision;

    fn record(opinion: &str) -> PromptRecord {
        PromptRecord::training("Civil Rights", "A challenge to a state statute.", opinion, Decision::Deny)
    }

    #[test]
    fn under_budget_is_unchanged() {
        let r = record(&"word ".repeat(300));
        let budget = TokenBudget::default();
        assert!(budget.estimate_record(&r).unwrap() < 1000);
        assert_eq!(fit_to_budget(&r, &budget).unwrap(), r);
    }

    #[test]
    fn long_opinion_truncated_at_sentence() {
        let opinion = "The statute is void. ".repeat(1250);
        let r = record(&opinion);
        let budget = TokenBudget::default();
        let fitted = fit_to_budget(&r, &budget).unwrap();
        assert!(budget.estimate_record(&fitted).unwrap() <= 1000);
        let cut = fitted.opinion.as_deref().unwrap();
        assert!(cut.ends_with("void."));
        assert!(opinion.starts_with(cut));
        assert_eq!(fitted.issue, r.issue);
        assert_eq!(fitted.decision, r.decision);
        assert_eq!(fitted.topic, r.topic);
        // one more sentence would overflow
        let mut longer = fitted.clone();
        longer.opinion = Some(format!("{cut} The statute is void."));
        assert!(budget.estimate_record(&longer).unwrap() > 1000);
    }

    #[test]
    fn no_sentence_boundary_falls_back_to_chars() {
        let r = record(&"x".repeat(8000));
        let budget = TokenBudget::new(200);
        let fitted = fit_to_budget(&r, &budget).unwrap();
        assert_eq!(budget.estimate_record(&fitted).unwrap(), 200);
    }

    #[test]
    fn topic_cut_after_opinion() {
        let mut r = record("Short.");
        r.topic = "Background sentence. ".repeat(200);
        let budget = TokenBudget::new(100);
        let fitted = fit_to_budget(&r, &budget).unwrap();
        assert!(budget.estimate_record(&fitted).unwrap() <= 100);
        assert_eq!(fitted.opinion.as_deref(), Some("S"));
        assert!(fitted.topic.ends_with("sentence."));
    }

    #[test]
    fn infeasible_budget() {
        let mut r = record("Opinion.");
        r.issue = "i".repeat(200);
        assert!(matches!(
            fit_to_budget(&r, &TokenBudget::new(10)),
            Err(PromptError::BudgetImpossible { max_tokens: 10, .. })
        ));
    }

    #[test]
    fn estimators() {
        assert_eq!(TokenEstimator::BytesDiv4.estimate(""), 0);
        assert_eq!(TokenEstimator::BytesDiv4.estimate("abcde"), 2);
        assert_eq!(TokenEstimator::WhitespaceWordsX13.estimate("a b c"), 4);
        let counter = TokenEstimator::BackendReported(Arc::new(|s: &str| s.chars().count()));
        assert_eq!(counter.estimate("héllo"), 5);
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(matches!(
            fit_to_budget(&record("x"), &TokenBudget::new(0)),
            Err(PromptError::InvalidBudget(_))
        ));
    }
}
