//! Seeded synthetic corpora with two voting blocs, for demos, tests and
//! benchmarks when the real tables are not at hand.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::scdb::{issue_area_label, write_scdb};
use super::{Case, CorpusError, JusticeVote, ManifestEntry, OpinionDoc};
use crate::justices::display_name;
use crate::{Decision, Vote};

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub n_cases: usize,
    pub seed: u64,
    pub bloc_a: Vec<String>,
    pub bloc_b: Vec<String>,
    /// Probability that the two blocs lean opposite ways on a case.
    pub split_rate: f64,
    /// Probability that a justice breaks from their bloc.
    pub defect_rate: f64,
    pub precedent_rate: f64,
    pub natural_court: String,
    pub first_term: i32,
    pub last_term: i32,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        Self {
            n_cases: 290,
            seed: 0,
            bloc_a: ids(&["JGRoberts", "AScalia", "AMKennedy", "CThomas", "SAAlito"]),
            bloc_b: ids(&["RBGinsburg", "SGBreyer", "SSotomayor", "EKagan"]),
            split_rate: 0.7,
            defect_rate: 0.1,
            precedent_rate: 0.08,
            natural_court: crate::justices::ROBERTS_IV_TAG.to_string(),
            first_term: 2010,
            last_term: 2015,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SyntheticCorpus {
    pub cases: Vec<Case>,
    pub votes: Vec<JusticeVote>,
    /// One majority opinion per case plus a dissent when there is one.
    pub opinions: Vec<OpinionDoc>,
}

/// Paths written by [`SyntheticCorpus::write_fixture`].
#[derive(Debug, Clone)]
pub struct FixturePaths {
    pub cases_csv: PathBuf,
    pub votes_csv: PathBuf,
    pub opinion_dir: PathBuf,
    pub manifest: PathBuf,
}

const TOPICS: [&str; 6] = [
    "the scope of a federal statute",
    "a state's regulatory authority",
    "the admissibility of evidence",
    "an agency's interpretation of its mandate",
    "the reach of a constitutional protection",
    "the availability of a judicial remedy",
];

/// Generates a corpus where each bloc votes together and the blocs usually
/// disagree. Every bench member votes in every case, so there are no ties.
pub fn generate(spec: &SyntheticSpec) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = SyntheticCorpus::default();
    let terms = (spec.last_term - spec.first_term + 1).max(1) as usize;
    let per_term = spec.n_cases.div_ceil(terms).max(1);

    for i in 0..spec.n_cases {
        let term = spec.first_term + (i / per_term) as i32;
        let case_id = format!("{term}-{:03}", i % per_term + 1);
        let lean_a = if rng.gen_bool(0.5) { Decision::Approve } else { Decision::Deny };
        let lean_b = if rng.gen_bool(spec.split_rate) { lean_a.opposite() } else { lean_a };

        let mut ballots: Vec<(String, Decision)> = Vec::new();
        for (bloc, lean) in [(&spec.bloc_a, lean_a), (&spec.bloc_b, lean_b)] {
            for justice in bloc {
                let vote = if rng.gen_bool(spec.defect_rate) { lean.opposite() } else { lean };
                ballots.push((justice.clone(), vote));
            }
        }
        let approvals = ballots.iter().filter(|(_, d)| *d == Decision::Approve).count();
        let disposition = if 2 * approvals > ballots.len() {
            Decision::Approve
        } else if 2 * approvals < ballots.len() {
            Decision::Deny
        } else {
            lean_a
        };

        let issue_code = rng.gen_range(1..=14).to_string();
        let topic = TOPICS[rng.gen_range(0..TOPICS.len())];
        let month = rng.gen_range(1..=6);
        let day = rng.gen_range(1..=28);
        let decided_date = NaiveDate::from_ymd_opt(term + 1, month, day).expect("valid date");
        out.cases.push(Case {
            case_id: case_id.clone(),
            term,
            natural_court: spec.natural_court.clone(),
            issue_area: issue_area_label(&issue_code).unwrap_or_default(),
            topic_summary: format!("Whether the lower court erred on {topic} (docket {case_id})."),
            seeking: Some("reversal of the judgment below".to_string()),
            disposition: Some(disposition),
            precedent_altered: rng.gen_bool(spec.precedent_rate),
            decided_date,
        });

        let mut author = None;
        let mut dissenter = None;
        let start = i % ballots.len().max(1);
        for k in 0..ballots.len() {
            let (justice, vote) = &ballots[(start + k) % ballots.len()];
            if *vote == disposition && author.is_none() {
                author = Some(justice.clone());
            }
            if *vote != disposition && dissenter.is_none() {
                dissenter = Some(justice.clone());
            }
        }
        for (justice, vote) in &ballots {
            out.votes.push(JusticeVote {
                case_id: case_id.clone(),
                justice_id: justice.clone(),
                vote: Vote::from(*vote),
                with_majority: Some(*vote == disposition),
            });
        }
        for (justice, decision) in [(author, disposition), (dissenter, disposition.opposite())] {
            let Some(justice) = justice else { continue };
            let verb = match decision {
                Decision::Approve => "grant",
                Decision::Deny => "deny",
            };
            out.opinions.push(OpinionDoc {
                case_id: case_id.clone(),
                justice_id: justice.clone(),
                text: format!(
                    "{} writes on {topic}. The record supports the view taken here. \
                     For these reasons I would {verb} the relief sought.",
                    display_name(&justice)
                ),
                decision,
                written_year: term + 1,
            });
        }
    }
    out
}

impl SyntheticCorpus {
    /// Writes SCDB-style CSVs, one text file per opinion and a manifest into
    /// `dir`, in the layout the ingestion readers accept.
    pub fn write_fixture(&self, dir: &Path) -> Result<FixturePaths, CorpusError> {
        let paths = FixturePaths {
            cases_csv: dir.join("cases.csv"),
            votes_csv: dir.join("votes.csv"),
            opinion_dir: dir.join("opinions"),
            manifest: dir.join("manifest.jsonl"),
        };
        fs::create_dir_all(&paths.opinion_dir).map_err(|e| CorpusError::io(&paths.opinion_dir, e))?;
        let create = |p: &Path| File::create(p).map_err(|e| CorpusError::io(p, e));
        write_scdb(
            &self.cases,
            &self.votes,
            BufWriter::new(create(&paths.cases_csv)?),
            BufWriter::new(create(&paths.votes_csv)?),
        )?;

        let mut manifest = BufWriter::new(create(&paths.manifest)?);
        for o in &self.opinions {
            let file = format!("{}_{}.txt", o.case_id, o.justice_id);
            let path = paths.opinion_dir.join(&file);
            fs::write(&path, &o.text).map_err(|e| CorpusError::io(&path, e))?;
            let entry = ManifestEntry {
                file,
                case_id: o.case_id.clone(),
                justice_id: o.justice_id.clone(),
                decision: o.decision,
                year: o.written_year,
            };
            let line = serde_json::to_string(&entry).expect("manifest entry serializes");
            writeln!(manifest, "{line}").map_err(|e| CorpusError::io(&paths.manifest, e))?;
        }
        manifest.flush().map_err(|e| CorpusError::io(&paths.manifest, e))?;
        Ok(paths)
    }
}
