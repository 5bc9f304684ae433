//! SCDB case- and justice-centred CSV tables.
//!
//! Outcome mapping: `partyWinning` 1 is an Approve disposition, 0 a Deny;
//! anything else leaves the disposition undefined and is reported.
//!
//! Vote mapping: a justice in the majority (`majority` = 2) voted the case's
//! disposition, a dissenter (`majority` = 1) the opposite. When `majority` is
//! blank the `vote` code decides: 1, 3, 4, 5 join the majority; 2, 6, 7
//! dissent. A blank `vote` is a recusal. Code 8 (equally divided) and votes on
//! cases without a disposition are unmappable and reported.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use csv::StringRecord;

use super::{Case, CorpusError, JusticeVote, SkipEntry};
use crate::justices::{canonical_id, natural_court_label};
use crate::{Decision, Vote};

const CASE_COLUMNS: [&str; 7] = [
    "caseId",
    "term",
    "naturalCourt",
    "issueArea",
    "partyWinning",
    "precedentAlteration",
    "dateDecision",
];
const VOTE_COLUMNS: [&str; 4] = ["caseId", "justiceName", "vote", "majority"];

const TERM_RANGE: std::ops::RangeInclusive<i32> = 1946..=2021;

const ISSUE_AREAS: [&str; 14] = [
    "Criminal Procedure",
    "Civil Rights",
    "First Amendment",
    "Due Process",
    "Privacy",
    "Attorneys",
    "Unions",
    "Economic Activity",
    "Judicial Power",
    "Federalism",
    "Interstate Relations",
    "Federal Taxation",
    "Miscellaneous",
    "Private Action",
];

/// Label for an SCDB `issueArea` code; non-numeric values pass through.
pub fn issue_area_label(code: &str) -> Option<String> {
    let code = code.trim();
    if code.is_empty() {
        return None;
    }
    match code.parse::<usize>() {
        Ok(n) if (1..=ISSUE_AREAS.len()).contains(&n) => Some(ISSUE_AREAS[n - 1].to_string()),
        Ok(_) => None,
        Err(_) => Some(code.to_string()),
    }
}

/// Inverse of [`issue_area_label`] for the known labels.
pub fn issue_area_code(label: &str) -> Option<usize> {
    ISSUE_AREAS.iter().position(|l| *l == label).map(|i| i + 1)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScdbTables {
    pub cases: Vec<Case>,
    pub votes: Vec<JusticeVote>,
    pub skipped: Vec<SkipEntry>,
}

pub fn load_scdb(cases_file: &Path, votes_file: &Path) -> Result<ScdbTables, CorpusError> {
    let cases = std::fs::File::open(cases_file).map_err(|e| CorpusError::io(cases_file, e))?;
    let votes = std::fs::File::open(votes_file).map_err(|e| CorpusError::io(votes_file, e))?;
    read_scdb(
        cases,
        &cases_file.display().to_string(),
        votes,
        &votes_file.display().to_string(),
    )
}

pub fn read_scdb<C: Read, V: Read>(
    cases: C,
    cases_name: &str,
    votes: V,
    votes_name: &str,
) -> Result<ScdbTables, CorpusError> {
    let mut skipped = Vec::new();
    let cases = read_cases(cases, cases_name, &mut skipped)?;
    let votes = read_votes(votes, votes_name, &cases, &mut skipped)?;
    Ok(ScdbTables {
        cases,
        votes,
        skipped,
    })
}

struct Columns(HashMap<String, usize>);

impl Columns {
    fn new(headers: &StringRecord, required: &[&str], file: &str) -> Result<Self, CorpusError> {
        let map: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().trim_start_matches('\u{feff}').to_string(), i))
            .collect();
        if let Some(missing) = required.iter().find(|c| !map.contains_key(**c)) {
            return Err(CorpusError::MissingColumn {
                file: file.to_string(),
                column: missing.to_string(),
            });
        }
        Ok(Self(map))
    }

    fn get<'r>(&self, row: &'r StringRecord, name: &str) -> &'r str {
        self.0
            .get(name)
            .and_then(|&i| row.get(i))
            .map(str::trim)
            .unwrap_or("")
    }

    fn optional<'r>(&self, row: &'r StringRecord, names: &[&str]) -> Option<&'r str> {
        names
            .iter()
            .find_map(|n| self.0.get(*n))
            .and_then(|&i| row.get(i))
            .map(str::trim)
            .filter(|s| !s.is_empty())
    }
}

fn malformed(file: &str, line: u64, reason: impl Into<String>) -> CorpusError {
    CorpusError::MalformedRow {
        file: file.to_string(),
        line,
        reason: reason.into(),
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%m/%d/%Y"))
        .ok()
}

fn read_cases<R: Read>(
    input: R,
    file: &str,
    skipped: &mut Vec<SkipEntry>,
) -> Result<Vec<Case>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let cols = Columns::new(reader.headers()?, &CASE_COLUMNS, file)?;
    let mut seen = HashSet::new();
    let mut cases = Vec::new();

    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let case_id = cols.get(&row, "caseId").to_string();
        if case_id.is_empty() {
            return Err(malformed(file, line, "empty caseId"));
        }
        if !seen.insert(case_id.clone()) {
            return Err(CorpusError::DuplicateKey(format!("caseId {case_id}")));
        }

        let term: i32 = cols
            .get(&row, "term")
            .parse()
            .map_err(|_| malformed(file, line, "term is not an integer"))?;
        if !TERM_RANGE.contains(&term) {
            return Err(malformed(file, line, format!("term {term} outside 1946-2021")));
        }

        let date_raw = cols.get(&row, "dateDecision");
        let decided_date = parse_date(date_raw)
            .ok_or_else(|| malformed(file, line, format!("bad dateDecision `{date_raw}`")))?;

        let precedent_altered = match cols.get(&row, "precedentAlteration") {
            "" | "0" => false,
            "1" => true,
            other => return Err(malformed(file, line, format!("bad precedentAlteration `{other}`"))),
        };

        let disposition = match cols.get(&row, "partyWinning") {
            "1" => Some(Decision::Approve),
            "0" => Some(Decision::Deny),
            other => {
                skipped.push(SkipEntry::new(
                    file,
                    Some(line),
                    &case_id,
                    format!("unmappable partyWinning `{other}`; disposition left undefined"),
                ));
                None
            }
        };

        let issue_raw = cols.get(&row, "issueArea");
        let issue_area = issue_area_label(issue_raw).unwrap_or_else(|| {
            skipped.push(SkipEntry::new(
                file,
                Some(line),
                &case_id,
                format!("unmappable issueArea `{issue_raw}`"),
            ));
            "Unspecified".to_string()
        });

        cases.push(Case {
            case_id,
            term,
            natural_court: natural_court_label(cols.get(&row, "naturalCourt")),
            issue_area,
            topic_summary: cols
                .optional(&row, &["topicSummary", "topic"])
                .unwrap_or("")
                .to_string(),
            seeking: cols
                .optional(&row, &["reliefSought", "seeking"])
                .map(str::to_string),
            disposition,
            precedent_altered,
            decided_date,
        });
    }
    Ok(cases)
}

fn read_votes<R: Read>(
    input: R,
    file: &str,
    cases: &[Case],
    skipped: &mut Vec<SkipEntry>,
) -> Result<Vec<JusticeVote>, CorpusError> {
    let dispositions: HashMap<&str, Option<Decision>> = cases
        .iter()
        .map(|c| (c.case_id.as_str(), c.disposition))
        .collect();
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let cols = Columns::new(reader.headers()?, &VOTE_COLUMNS, file)?;
    let mut seen = HashSet::new();
    let mut votes = Vec::new();

    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let case_id = cols.get(&row, "caseId").to_string();
        let justice_raw = cols.get(&row, "justiceName");
        if case_id.is_empty() || justice_raw.is_empty() {
            return Err(malformed(file, line, "empty caseId or justiceName"));
        }
        let justice_id = canonical_id(justice_raw);
        let key = format!("({case_id}, {justice_id})");
        if !seen.insert((case_id.clone(), justice_id.clone())) {
            return Err(CorpusError::DuplicateKey(key));
        }

        let Some(&disposition) = dispositions.get(case_id.as_str()) else {
            skipped.push(SkipEntry::new(file, Some(line), key, "vote for unknown caseId"));
            continue;
        };

        let vote_code = cols.get(&row, "vote");
        if vote_code.is_empty() {
            votes.push(JusticeVote {
                case_id,
                justice_id,
                vote: Vote::Recused,
                with_majority: None,
            });
            continue;
        }

        let with_majority = match (cols.get(&row, "majority"), vote_code) {
            ("2", _) => Some(true),
            ("1", _) => Some(false),
            ("", "1" | "3" | "4" | "5") => Some(true),
            ("", "2" | "6" | "7") => Some(false),
            _ => None,
        };
        let (Some(with_majority), Some(disposition)) = (with_majority, disposition) else {
            skipped.push(SkipEntry::new(
                file,
                Some(line),
                key,
                format!(
                    "unmappable vote `{vote_code}` / majority `{}`",
                    cols.get(&row, "majority")
                ),
            ));
            continue;
        };
        let decision = if with_majority {
            disposition
        } else {
            disposition.opposite()
        };
        votes.push(JusticeVote {
            case_id,
            justice_id,
            vote: decision.into(),
            with_majority: Some(with_majority),
        });
    }
    Ok(votes)
}

/// Writes tables in the layout [`read_scdb`] accepts.
pub fn write_scdb<C: Write, V: Write>(
    cases: &[Case],
    votes: &[JusticeVote],
    cases_out: C,
    votes_out: V,
) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(cases_out);
    let mut header: Vec<&str> = CASE_COLUMNS.to_vec();
    header.extend(["topicSummary", "reliefSought"]);
    w.write_record(&header)?;
    for c in cases {
        let issue = issue_area_code(&c.issue_area)
            .map(|n| n.to_string())
            .unwrap_or_else(|| c.issue_area.clone());
        let court = roberts_code(&c.natural_court).unwrap_or_else(|| c.natural_court.clone());
        let party = match c.disposition {
            Some(Decision::Approve) => "1",
            Some(Decision::Deny) => "0",
            None => "2",
        };
        let date = format!(
            "{}/{}/{}",
            c.decided_date.month(),
            c.decided_date.day(),
            c.decided_date.year()
        );
        w.write_record([
            c.case_id.as_str(),
            &c.term.to_string(),
            &court,
            &issue,
            party,
            if c.precedent_altered { "1" } else { "0" },
            &date,
            &c.topic_summary,
            c.seeking.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush().map_err(|e| CorpusError::io(Path::new("<cases>"), e))?;

    let mut w = csv::Writer::from_writer(votes_out);
    w.write_record(VOTE_COLUMNS)?;
    for v in votes {
        let (vote, majority) = match v.with_majority {
            None => ("", ""),
            Some(true) => ("1", "2"),
            Some(false) => ("2", "1"),
        };
        w.write_record([v.case_id.as_str(), &v.justice_id, vote, majority])?;
    }
    w.flush().map_err(|e| CorpusError::io(Path::new("<votes>"), e))?;
    Ok(())
}

fn roberts_code(label: &str) -> Option<String> {
    (1701..=1708)
        .map(|n| n.to_string())
        .find(|code| natural_court_label(code) == label)
}
