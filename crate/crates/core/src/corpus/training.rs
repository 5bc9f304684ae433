use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{same_court, Case, CorpusError, JusticeVote, OpinionDoc, SkipEntry};
use crate::prompt::{fit_to_budget, serialize_prompt, Mode, PromptRecord, TokenBudget};
use crate::Decision;

/// Minimum participating votes for a case to count as unanimous.
pub const MIN_UNANIMOUS_VOTES: usize = 5;

/// Source of the `topic` field for a case.
pub trait Summarizer: Send + Sync {
    fn summarize(&self, case: &Case) -> String;
}

/// Uses the case's stored topic summary, optionally clipped to `max_chars`
/// at a word boundary.
#[derive(Debug, Clone, Default)]
pub struct PassThroughSummarizer {
    pub max_chars: Option<usize>,
}

impl Summarizer for PassThroughSummarizer {
    fn summarize(&self, case: &Case) -> String {
        let topic = case.topic_summary.trim();
        match self.max_chars {
            Some(max) if topic.chars().count() > max => {
                let clipped: String = topic.chars().take(max).collect();
                match clipped.rfind(char::is_whitespace) {
                    Some(idx) if idx > 0 => clipped[..idx].trim_end().to_string(),
                    _ => clipped,
                }
            }
            _ => topic.to_string(),
        }
    }
}

pub struct TrainingOptions {
    pub budget: TokenBudget,
    /// Inclusive range of opinion years.
    pub year_range: (i32, i32),
    pub summarizer: Box<dyn Summarizer>,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        Self {
            budget: TokenBudget::default(),
            year_range: (2003, 2016),
            summarizer: Box::new(PassThroughSummarizer::default()),
        }
    }
}

/// Prompt records per key plus everything that was skipped or truncated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSets {
    pub sets: BTreeMap<String, Vec<PromptRecord>>,
    pub report: Vec<SkipEntry>,
}

/// All non-recused votes identical, with at least five participants.
pub fn is_unanimous<'a>(votes: impl IntoIterator<Item = &'a JusticeVote>) -> bool {
    let mut count = 0usize;
    let mut first: Option<Decision> = None;
    for decision in votes.into_iter().filter_map(|v| v.vote.decision()) {
        match first {
            None => first = Some(decision),
            Some(d) if d != decision => return false,
            Some(_) => {}
        }
        count += 1;
    }
    count >= MIN_UNANIMOUS_VOTES
}

/// Unanimous cases of the given natural court, sorted by case id.
pub fn build_base_training_set(
    cases: &[Case],
    votes: &[JusticeVote],
    court_tag: &str,
) -> Result<Vec<String>, CorpusError> {
    let mut by_case: HashMap<&str, Vec<&JusticeVote>> = HashMap::new();
    for v in votes {
        by_case.entry(v.case_id.as_str()).or_default().push(v);
    }
    let mut ids: Vec<String> = cases
        .iter()
        .filter(|c| same_court(&c.natural_court, court_tag))
        .filter(|c| {
            by_case
                .get(c.case_id.as_str())
                .is_some_and(|vs| is_unanimous(vs.iter().copied()))
        })
        .map(|c| c.case_id.clone())
        .collect();
    ids.sort();
    ids.dedup();
    if ids.is_empty() {
        return Err(CorpusError::EmptyResult(format!(
            "no unanimous cases for court `{court_tag}`"
        )));
    }
    Ok(ids)
}

fn build_record(
    case: &Case,
    opinion: &OpinionDoc,
    options: &TrainingOptions,
    report: &mut Vec<SkipEntry>,
) -> Option<PromptRecord> {
    let key = format!("{}/{}", opinion.case_id, opinion.justice_id);
    let topic = options.summarizer.summarize(case);
    if topic.is_empty() {
        report.push(SkipEntry::new("training", None, key, "missing topic summary"));
        return None;
    }
    let mut record = PromptRecord::training(
        case.issue_area.clone(),
        topic,
        opinion.text.clone(),
        opinion.decision,
    );
    record.seeking = case.seeking.clone();
    match fit_to_budget(&record, &options.budget) {
        Ok(fitted) => {
            if fitted != record {
                report.push(SkipEntry::new(
                    "training",
                    None,
                    key,
                    format!("truncated to {} tokens", options.budget.max_tokens),
                ));
            }
            Some(fitted)
        }
        Err(e) => {
            report.push(SkipEntry::new("training", None, key, e.to_string()));
            None
        }
    }
}

/// Prompt records for every opinion attached to the given base cases,
/// ordered by (case id, author).
pub fn base_training_records(
    case_ids: &[String],
    cases: &[Case],
    opinions: &[OpinionDoc],
    options: &TrainingOptions,
) -> (Vec<PromptRecord>, Vec<SkipEntry>) {
    let wanted: HashSet<&str> = case_ids.iter().map(String::as_str).collect();
    let by_id: HashMap<&str, &Case> = cases.iter().map(|c| (c.case_id.as_str(), c)).collect();
    let mut selected: Vec<&OpinionDoc> = opinions
        .iter()
        .filter(|o| wanted.contains(o.case_id.as_str()))
        .collect();
    selected.sort_by(|a, b| (&a.case_id, &a.justice_id).cmp(&(&b.case_id, &b.justice_id)));

    let mut report = Vec::new();
    let records = selected
        .into_iter()
        .filter_map(|o| {
            let case = by_id.get(o.case_id.as_str())?;
            build_record(case, o, options, &mut report)
        })
        .collect();
    (records, report)
}

/// One training set per bench justice from the opinions they authored within
/// the year range. Opinions on `exclude`d cases never enter a set.
pub fn build_justice_training_sets(
    opinions: &[OpinionDoc],
    cases: &[Case],
    bench: &[String],
    options: &TrainingOptions,
    exclude: &HashSet<String>,
) -> TrainingSets {
    let by_id: HashMap<&str, &Case> = cases.iter().map(|c| (c.case_id.as_str(), c)).collect();
    let mut out = TrainingSets {
        sets: bench.iter().map(|j| (j.clone(), Vec::new())).collect(),
        report: Vec::new(),
    };
    let (from, to) = options.year_range;

    let mut ordered: Vec<&OpinionDoc> = opinions.iter().collect();
    ordered.sort_by(|a, b| (&a.justice_id, &a.case_id).cmp(&(&b.justice_id, &b.case_id)));
    for opinion in ordered {
        let key = format!("{}/{}", opinion.case_id, opinion.justice_id);
        if !out.sets.contains_key(&opinion.justice_id) {
            out.report
                .push(SkipEntry::new("training", None, key, "unknown justice: author not on bench"));
            continue;
        }
        if exclude.contains(&opinion.case_id) {
            continue;
        }
        if opinion.written_year < from || opinion.written_year > to {
            out.report.push(SkipEntry::new(
                "training",
                None,
                key,
                format!("year {} outside {from}-{to}", opinion.written_year),
            ));
            continue;
        }
        let Some(case) = by_id.get(opinion.case_id.as_str()) else {
            out.report.push(SkipEntry::new("training", None, key, "case not loaded"));
            continue;
        };
        if let Some(record) = build_record(case, opinion, options, &mut out.report) {
            out.sets.get_mut(&opinion.justice_id).unwrap().push(record);
        }
    }
    out
}

#[derive(Serialize)]
struct TextLine<'a> {
    text: &'a str,
}

/// Writes `{"text": <serialized training prompt>}` per line. Returns the
/// number of lines written.
pub fn export_training_jsonl(records: &[PromptRecord], out_path: &Path) -> Result<usize, CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::EmptyResult("no training records to export".into()));
    }
    let file = File::create(out_path).map_err(|e| CorpusError::io(out_path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        let text = serialize_prompt(record, Mode::Training)?;
        let line = serde_json::to_string(&TextLine { text: &text }).expect("string serializes");
        writeln!(out, "{line}").map_err(|e| CorpusError::io(out_path, e))?;
    }
    out.flush().map_err(|e| CorpusError::io(out_path, e))?;
    Ok(records.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vote;
    use chrono::NaiveDate;

    fn case(id: &str, court: &str) -> Case {
        Case {
            case_id: id.into(),
            term: 2012,
            natural_court: court.into(),
            issue_area: "Civil Rights".into(),
            topic_summary: format!("Topic of {id}."),
            seeking: None,
            disposition: Some(Decision::Approve),
            precedent_altered: false,
            decided_date: NaiveDate::from_ymd_opt(2013, 1, 1).unwrap(),
        }
    }

    fn votes(case_id: &str, pattern: &[Vote]) -> Vec<JusticeVote> {
        pattern
            .iter()
            .enumerate()
            .map(|(i, &vote)| JusticeVote {
                case_id: case_id.into(),
                justice_id: format!("J{i}"),
                vote,
                with_majority: (vote != Vote::Recused).then_some(true),
            })
            .collect()
    }

    #[test]
    fn unanimity_rules() {
        use Vote::*;
        let cases = vec![
            case("all9", "Roberts IV"),
            case("split", "Roberts IV"),
            case("recused", "Roberts IV"),
            case("other", "Roberts III"),
            case("few", "Roberts IV"),
        ];
        let mut vs = votes("all9", &[Approve; 9]);
        vs.extend(votes("split", &[Approve, Approve, Approve, Approve, Approve, Deny, Deny, Deny, Deny]));
        vs.extend(votes("recused", &[Approve, Approve, Approve, Approve, Approve, Approve, Approve, Approve, Recused]));
        vs.extend(votes("other", &[Deny; 9]));
        vs.extend(votes("few", &[Deny, Deny, Deny, Deny, Recused, Recused, Recused, Recused, Recused]));
        let ids = build_base_training_set(&cases, &vs, "Roberts IV").unwrap();
        assert_eq!(ids, vec!["all9".to_string(), "recused".to_string()]);
    }

    #[test]
    fn no_unanimous_cases_is_an_error() {
        let cases = vec![case("split", "Roberts IV")];
        let vs = votes("split", &[Vote::Approve, Vote::Deny, Vote::Approve, Vote::Deny, Vote::Approve]);
        assert!(matches!(
            build_base_training_set(&cases, &vs, "Roberts IV"),
            Err(CorpusError::EmptyResult(_))
        ));
    }

    fn opinion(case_id: &str, justice: &str, year: i32, text: &str) -> OpinionDoc {
        OpinionDoc {
            case_id: case_id.into(),
            justice_id: justice.into(),
            text: text.into(),
            decision: Decision::Deny,
            written_year: year,
        }
    }

    #[test]
    fn justice_sets_filter_and_report() {
        let bench: Vec<String> = crate::justices::roberts_iv();
        let cases: Vec<Case> = (0..12).map(|i| case(&format!("c{i}"), "Roberts IV")).collect();
        let mut ops: Vec<OpinionDoc> = bench
            .iter()
            .enumerate()
            .map(|(i, j)| opinion(&format!("c{i}"), j, 2012, "Reasoning."))
            .collect();
        ops.push(opinion("c9", "SAAlito", 2001, "Too old."));
        ops.push(opinion("c10", "JPStevens", 2008, "Not on bench."));
        ops.push(opinion("c11", "EKagan", 2014, &"Very long sentence here. ".repeat(2000)));
        ops.push(opinion("c0", "EKagan", 2014, "Held-out case."));

        let exclude: HashSet<String> = ["c0".to_string()].into();
        let built = build_justice_training_sets(&ops, &cases, &bench, &TrainingOptions::default(), &exclude);
        assert_eq!(built.sets.len(), 9);
        assert_eq!(built.sets["SAAlito"].len(), 1);
        assert_eq!(built.sets["JGRoberts"].len(), 0, "c0 is excluded");
        assert_eq!(built.sets["EKagan"].len(), 2);
        let reasons: Vec<&str> = built.report.iter().map(|r| r.reason.as_str()).collect();
        assert!(reasons.iter().any(|r| r.contains("2001")));
        assert!(reasons.iter().any(|r| r.contains("unknown justice")));
        assert!(reasons.iter().any(|r| r.contains("truncated")));
        let budget = TokenBudget::default();
        for set in built.sets.values() {
            for r in set {
                assert!(budget.estimate_record(r).unwrap() <= 1000);
            }
        }
    }

    #[test]
    fn pass_through_summarizer_clips_on_words() {
        let s = PassThroughSummarizer { max_chars: Some(12) };
        let mut c = case("x", "Roberts IV");
        c.topic_summary = "A state law restricting sales.".into();
        assert_eq!(s.summarize(&c), "A state law");
    }

    #[test]
    fn export_lines_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            PromptRecord::training("I", "T", "first\nsecond paragraph", Decision::Deny),
            PromptRecord::training("I", "T", "b", Decision::Approve),
            PromptRecord::training("I", "T", "c", Decision::Deny),
        ];
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        assert_eq!(export_training_jsonl(&records, &a).unwrap(), 3);
        export_training_jsonl(&records, &b).unwrap();
        let text = std::fs::read_to_string(&a).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text, std::fs::read_to_string(&b).unwrap());
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert!(first["text"].as_str().unwrap().contains("first\nsecond"));
        assert!(export_training_jsonl(&[], &a).is_err());
    }
}
