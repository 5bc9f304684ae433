use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Case, CorpusError, OpinionDoc, SkipEntry};
use crate::justices::canonical_id;
use crate::Decision;

const YEAR_RANGE: std::ops::RangeInclusive<i32> = 2003..=2022;

/// One manifest line linking a text file to its case and author.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub case_id: String,
    pub justice_id: String,
    pub decision: Decision,
    pub year: i32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpinionSet {
    pub opinions: Vec<OpinionDoc>,
    pub skipped: Vec<SkipEntry>,
}

/// Normalizes line endings and drops control characters other than newline
/// and tab.
pub fn clean_text(raw: &str) -> String {
    raw.replace("\r\n", "\n")
        .chars()
        .map(|c| if c == '\r' { '\n' } else { c })
        .filter(|&c| c == '\n' || c == '\t' || !c.is_control())
        .collect()
}

/// Joins manifest entries (paths relative to `opinion_dir`) to known cases.
pub fn attach_opinions(
    cases: &[Case],
    opinion_dir: &Path,
    manifest: &Path,
) -> Result<OpinionSet, CorpusError> {
    let known: HashSet<&str> = cases.iter().map(|c| c.case_id.as_str()).collect();
    let manifest_name = manifest.display().to_string();
    let reader = BufReader::new(File::open(manifest).map_err(|e| CorpusError::io(manifest, e))?);

    let mut set = OpinionSet::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|e| CorpusError::io(manifest, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestEntry =
            serde_json::from_str(&line).map_err(|e| CorpusError::ManifestParse {
                file: manifest_name.clone(),
                line: line_no,
                reason: e.to_string(),
            })?;

        let key = format!("{} ({})", entry.case_id, entry.file);
        if !known.contains(entry.case_id.as_str()) {
            set.skipped.push(SkipEntry::new(
                &manifest_name,
                Some(line_no),
                key,
                "orphan opinion: case_id not in cases",
            ));
            continue;
        }
        if !YEAR_RANGE.contains(&entry.year) {
            set.skipped.push(SkipEntry::new(
                &manifest_name,
                Some(line_no),
                key,
                format!("year {} outside 2003-2022", entry.year),
            ));
            continue;
        }

        let path = opinion_dir.join(&entry.file);
        let raw = std::fs::read_to_string(&path).map_err(|e| CorpusError::io(&path, e))?;
        let text = clean_text(&raw);
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyOpinion(path));
        }
        set.opinions.push(OpinionDoc {
            case_id: entry.case_id,
            justice_id: canonical_id(&entry.justice_id),
            text,
            decision: entry.decision,
            written_year: entry.year,
        });
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use std::io::Write;

    fn case(id: &str) -> Case {
        Case {
            case_id: id.into(),
            term: 2010,
            natural_court: "Roberts IV".into(),
            issue_area: "First Amendment".into(),
            topic_summary: "t".into(),
            seeking: None,
            disposition: Some(Decision::Deny),
            precedent_altered: false,
            decided_date: NaiveDate::from_ymd_opt(2011, 6, 27).unwrap(),
        }
    }

    fn fixture(entries: &[(&str, &str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        let mut manifest = File::create(dir.path().join("manifest.jsonl")).unwrap();
        for (file, case_id, text) in entries {
            std::fs::write(dir.path().join(file), text).unwrap();
            writeln!(
                manifest,
                r#"{{"file": "{file}", "case_id": "{case_id}", "justice_id": "Ruth Bader Ginsburg", "decision": "deny", "year": 2011}}"#
            )
            .unwrap();
        }
        dir
    }

    #[test]
    fn joins_known_cases_and_reports_orphans() {
        let dir = fixture(&[("a.txt", "c1", "Text one.\r\nMore."), ("b.txt", "zz", "Orphan.")]);
        let set = attach_opinions(&[case("c1")], dir.path(), &dir.path().join("manifest.jsonl")).unwrap();
        assert_eq!(set.opinions.len(), 1);
        assert_eq!(set.opinions[0].case_id, "c1");
        assert_eq!(set.opinions[0].justice_id, "RBGinsburg");
        assert_eq!(set.opinions[0].text, "Text one.\nMore.");
        assert_eq!(set.skipped.len(), 1);
        assert!(set.skipped[0].reason.contains("orphan"));
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = fixture(&[("empty.txt", "c1", "  \n")]);
        let err = attach_opinions(&[case("c1")], dir.path(), &dir.path().join("manifest.jsonl")).unwrap_err();
        assert!(matches!(&err, CorpusError::EmptyOpinion(p) if p.ends_with("empty.txt")));
        assert!(err.to_string().contains("empty.txt"));
    }

    #[test]
    fn bad_manifest_line() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("m.jsonl"), "{not json}\n").unwrap();
        let err = attach_opinions(&[], dir.path(), &dir.path().join("m.jsonl")).unwrap_err();
        assert!(matches!(err, CorpusError::ManifestParse { line: 1, .. }));
    }
}
