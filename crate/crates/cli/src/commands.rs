use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use serde::Serialize;

use scotus_sim::corpus::{
    attach_opinions, base_training_records, build_justice_training_sets, export_training_jsonl,
    load_scdb, read_jsonl, same_court, split_corpus, write_jsonl, Case, CorpusSplit, JusticeVote,
    OpinionDoc, SkipEntry, SplitOptions, TrainingOptions,
};
use scotus_sim::court::{
    apply_env_overrides, http_bench, load_registry, run_docket, shared_bench, Agent, CourtConfig,
    SimulationOutcome, StubBackend, StubProfile, StubSpec,
};
use scotus_sim::justices::{canonical_id, roberts_iv, ROBERTS_IV_TAG};
use scotus_sim::metrics::{anti_overturn_frequency, evaluate, vote_correlation_matrix, EvaluationExtras};
use scotus_sim::{PromptRecord, TokenBudget};

use crate::config::RunConfig;
use crate::{
    BuildTrainArgs, Cli, Command, CorrelateArgs, EvaluateArgs, IngestArgs, SimulateArgs, SplitArgs,
    SplitSelection,
};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BACKEND: u8 = 3;

pub const CASES_FILE: &str = "corpus.jsonl";
pub const VOTES_FILE: &str = "votes.jsonl";
pub const OPINIONS_FILE: &str = "opinions.jsonl";
pub const SKIP_FILE: &str = "skip_report.jsonl";

/// Opinion years used for the alignment measure.
const ALIGNMENT_YEARS: (i32, i32) = (2003, 2016);

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_INPUT,
            error,
        }
    }
}

impl From<scotus_sim::corpus::CorpusError> for Failure {
    fn from(error: scotus_sim::corpus::CorpusError) -> Self {
        anyhow::Error::from(error).into()
    }
}

type CmdResult = Result<(), Failure>;

pub fn run(cli: &Cli, config: &RunConfig) -> CmdResult {
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    match &cli.command {
        Command::Ingest(args) => ingest(args, config),
        Command::BuildTrain(args) => build_train(args, config, seed),
        Command::Split(args) => split(args, config, seed),
        Command::Simulate(args) => simulate(args, config, seed),
        Command::Evaluate(args) => evaluate_cmd(args, config, seed),
        Command::Correlate(args) => correlate(args, config),
    }
}

fn pick<T: Clone>(flag: &Option<T>, config: &Option<T>, name: &str) -> anyhow::Result<T> {
    flag.clone()
        .or_else(|| config.clone())
        .ok_or_else(|| anyhow!("missing --{name} (or `{}` in the config)", name.replace('-', "_")))
}

fn out_dir(flag: &Option<PathBuf>, config: &RunConfig) -> anyhow::Result<PathBuf> {
    let dir = pick(flag, &config.out_dir, "out-dir")?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Canonical, duplicate-free bench from the flag, the config or the default.
fn resolve_bench(flag: &Option<Vec<String>>, config: &RunConfig) -> anyhow::Result<Option<Vec<String>>> {
    let Some(raw) = flag.clone().or_else(|| config.bench.clone()) else {
        return Ok(None);
    };
    let mut seen = HashSet::new();
    let mut bench = Vec::with_capacity(raw.len());
    for name in raw {
        let id = canonical_id(&name);
        if id.is_empty() {
            continue;
        }
        if !seen.insert(id.clone()) {
            bail!("justice `{id}` listed twice in the bench");
        }
        bench.push(id);
    }
    Ok(Some(bench))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

struct Corpus {
    cases: Vec<Case>,
    votes: Vec<JusticeVote>,
    opinions: Vec<OpinionDoc>,
}

fn load_corpus(dir: &Path) -> anyhow::Result<Corpus> {
    let cases = read_jsonl(&dir.join(CASES_FILE))?;
    let votes = read_jsonl(&dir.join(VOTES_FILE))?;
    let opinions_path = dir.join(OPINIONS_FILE);
    let opinions = if opinions_path.exists() {
        read_jsonl(&opinions_path)?
    } else {
        Vec::new()
    };
    Ok(Corpus {
        cases,
        votes,
        opinions,
    })
}

fn ingest(args: &IngestArgs, config: &RunConfig) -> CmdResult {
    let cases_csv = pick(&args.cases, &config.scdb_cases, "cases")?;
    let votes_csv = pick(&args.votes, &config.scdb_votes, "votes")?;
    let opinion_dir = args.opinion_dir.clone().or_else(|| config.opinion_dir.clone());
    let manifest = args.manifest.clone().or_else(|| config.opinion_manifest.clone());
    let out = out_dir(&args.out_dir, config)?;

    let tables = load_scdb(&cases_csv, &votes_csv).map_err(anyhow::Error::from)?;
    let mut skipped: Vec<SkipEntry> = tables.skipped;
    let opinions = match (opinion_dir, manifest) {
        (Some(dir), Some(manifest)) => {
            let set = attach_opinions(&tables.cases, &dir, &manifest).map_err(anyhow::Error::from)?;
            skipped.extend(set.skipped);
            set.opinions
        }
        (None, None) => Vec::new(),
        _ => return Err(anyhow!("opinion directory and manifest must be given together").into()),
    };

    write_jsonl(&out.join(CASES_FILE), &tables.cases).map_err(anyhow::Error::from)?;
    write_jsonl(&out.join(VOTES_FILE), &tables.votes).map_err(anyhow::Error::from)?;
    write_jsonl(&out.join(OPINIONS_FILE), &opinions).map_err(anyhow::Error::from)?;
    write_jsonl(&out.join(SKIP_FILE), &skipped).map_err(anyhow::Error::from)?;
    println!(
        "ingested {} cases, {} votes, {} opinions ({} skipped) into {}",
        tables.cases.len(),
        tables.votes.len(),
        opinions.len(),
        skipped.len(),
        out.display()
    );
    Ok(())
}

struct SplitRun {
    corpus: Corpus,
    bench: Vec<String>,
    split: CorpusSplit,
    out: PathBuf,
}

fn run_split(sel: &SplitSelection, config: &RunConfig, seed: u64) -> anyhow::Result<SplitRun> {
    let corpus_dir = pick(&sel.corpus_dir, &config.corpus_dir, "corpus-dir")?;
    let out = out_dir(&sel.out_dir, config)?;
    if sel.year_from > sel.year_to {
        bail!("--year-from {} is after --year-to {}", sel.year_from, sel.year_to);
    }
    if sel.test_size == 0 {
        bail!("--test-size must be at least 1");
    }
    let corpus = load_corpus(&corpus_dir)?;
    let bench = resolve_bench(&sel.bench, config)?.unwrap_or_else(roberts_iv);
    let options = SplitOptions {
        court_tag: sel
            .court_tag
            .clone()
            .or_else(|| config.court_tag.clone())
            .unwrap_or_else(|| ROBERTS_IV_TAG.to_string()),
        test_size: sel.test_size,
        seed,
        year_range: (sel.year_from, sel.year_to),
    };
    let split = split_corpus(&corpus.cases, &corpus.votes, &corpus.opinions, &bench, &options)?;
    debug_assert!(split.is_disjoint());

    write_json(&out.join("split.json"), &split)?;
    let by_id: BTreeMap<&str, &Case> = corpus.cases.iter().map(|c| (c.case_id.as_str(), c)).collect();
    let docket: Vec<&Case> = split.test.iter().filter_map(|id| by_id.get(id.as_str()).copied()).collect();
    write_jsonl(&out.join("docket.jsonl"), &docket)?;
    Ok(SplitRun {
        corpus,
        bench,
        split,
        out,
    })
}

fn split(args: &SplitArgs, config: &RunConfig, seed: u64) -> CmdResult {
    let run = run_split(&args.selection, config, seed)?;
    println!(
        "split: {} test cases, {} base training cases into {}",
        run.split.test.len(),
        run.split.train_base.len(),
        run.out.display()
    );
    Ok(())
}

/// Writes a training file; an empty set yields an empty file.
fn write_training(records: &[PromptRecord], path: &Path) -> anyhow::Result<usize> {
    if records.is_empty() {
        File::create(path).with_context(|| format!("writing {}", path.display()))?;
        return Ok(0);
    }
    Ok(export_training_jsonl(records, path)?)
}

fn build_train(args: &BuildTrainArgs, config: &RunConfig, seed: u64) -> CmdResult {
    if args.max_tokens == 0 {
        return Err(anyhow!("--max-tokens must be positive").into());
    }
    let run = run_split(&args.selection, config, seed)?;
    let options = TrainingOptions {
        budget: TokenBudget::new(args.max_tokens),
        year_range: (args.selection.year_from, args.selection.year_to),
        ..TrainingOptions::default()
    };
    let corpus = &run.corpus;
    let (base, mut report) =
        base_training_records(&run.split.train_base, &corpus.cases, &corpus.opinions, &options);
    let sets = build_justice_training_sets(
        &corpus.opinions,
        &corpus.cases,
        &run.bench,
        &options,
        &run.split.test_ids(),
    );
    report.extend(sets.report);

    let train_dir = run.out.join("train");
    fs::create_dir_all(&train_dir).with_context(|| format!("creating {}", train_dir.display()))?;
    let base_lines = write_training(&base, &train_dir.join("base.jsonl"))?;
    let mut justice_lines = 0;
    for (justice, records) in &sets.sets {
        if records.is_empty() {
            log::warn!("no training opinions for {justice}");
        }
        justice_lines += write_training(records, &train_dir.join(format!("{justice}.jsonl")))?;
    }
    write_jsonl(&train_dir.join("report.jsonl"), &report)?;
    println!(
        "training: {base_lines} base prompts, {justice_lines} per-justice prompts, {} report entries into {}",
        report.len(),
        train_dir.display()
    );
    Ok(())
}

fn check_health(bench: &[Agent]) -> CmdResult {
    let mut healthy = 0;
    for agent in bench {
        match agent.backend.health(agent.justice_id()) {
            Ok(status) if status.is_ok() => healthy += 1,
            Ok(status) => log::warn!("{} reports status `{}`", agent.justice_id(), status.status),
            Err(e) => log::warn!("{} unreachable: {e}", agent.justice_id()),
        }
    }
    if healthy == 0 {
        return Err(Failure {
            code: EXIT_BACKEND,
            error: anyhow!("none of the {} backends passed the health check", bench.len()),
        });
    }
    if healthy < bench.len() {
        log::warn!("{} of {} backends healthy", healthy, bench.len());
    }
    Ok(())
}

fn load_stub_profile(path: &Path) -> anyhow::Result<StubProfile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw: BTreeMap<String, StubSpec> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut profile = StubProfile::new();
    for (name, spec) in raw {
        let id = canonical_id(&name);
        if profile.insert(id.clone(), spec).is_some() {
            bail!("stub profile lists `{id}` twice");
        }
    }
    Ok(profile)
}

fn simulate(args: &SimulateArgs, config: &RunConfig, seed: u64) -> CmdResult {
    let docket: Vec<Case> = read_jsonl(&args.docket).map_err(anyhow::Error::from)?;
    if docket.is_empty() {
        return Err(anyhow!("docket {} is empty", args.docket.display()).into());
    }
    let max_attempts = args.max_attempts.or(config.max_attempts).unwrap_or(10);
    if max_attempts == 0 {
        return Err(anyhow!("--max-attempts must be at least 1").into());
    }
    if args.max_tokens == 0 {
        return Err(anyhow!("--max-tokens must be positive").into());
    }
    let temperature = args.temperature.or(config.temperature);
    if let Some(t) = temperature {
        if !(t.is_finite() && t >= 0.0) {
            return Err(anyhow!("--temperature must be >= 0").into());
        }
    }
    let max_new_tokens = args.max_new_tokens.or(config.max_new_tokens);
    let bench_override = resolve_bench(&args.bench, config)?;

    // Flags win over the config; the config may name only one backend kind.
    let (registry, stub) = match (&args.registry, &args.stub_profile) {
        (Some(r), _) => (Some(r.clone()), None),
        (None, Some(s)) => (None, Some(s.clone())),
        (None, None) => match (&config.registry, &config.stub_profile) {
            (Some(_), Some(_)) => {
                return Err(anyhow!("config names both a registry and a stub profile").into())
            }
            (r, s) => (r.clone(), s.clone()),
        },
    };
    let bench: Vec<Agent> = match (registry, stub) {
        (None, Some(profile_path)) => {
            let profile = load_stub_profile(&profile_path)?;
            let justices = match bench_override {
                Some(b) => {
                    if let Some(missing) = b.iter().find(|j| !profile.contains_key(*j)) {
                        return Err(anyhow!("bench justice `{missing}` has no stub profile entry").into());
                    }
                    b
                }
                None => profile.keys().cloned().collect(),
            };
            let truth = docket
                .iter()
                .filter_map(|c| c.disposition.map(|d| (c.case_id.clone(), d)));
            let backend = StubBackend::new(profile)
                .map_err(|e| anyhow!("{}: {e}", profile_path.display()))?
                .reseeded(seed)
                .with_truth(truth);
            shared_bench(&justices, Arc::new(backend), Some(seed))
        }
        (Some(registry_path), _) => {
            let mut descriptors = load_registry(&registry_path).map_err(anyhow::Error::from)?;
            if let Some(b) = &bench_override {
                let want: BTreeSet<&String> = b.iter().collect();
                let have: BTreeSet<&String> = descriptors.iter().map(|d| &d.justice_id).collect();
                if want != have {
                    return Err(anyhow!("bench {want:?} does not match registry justices {have:?}").into());
                }
            }
            apply_env_overrides(&mut descriptors);
            for d in &mut descriptors {
                if let Some(t) = temperature {
                    d.temperature = t;
                }
                if let Some(n) = max_new_tokens {
                    d.max_new_tokens = n;
                }
                d.seed = Some(d.seed.unwrap_or(seed));
            }
            http_bench(&descriptors).map_err(anyhow::Error::from)?
        }
        (None, None) => return Err(anyhow!("one of --registry or --stub-profile is required").into()),
    };
    if bench.is_empty() {
        return Err(anyhow!("bench is empty").into());
    }
    check_health(&bench)?;

    let court = CourtConfig {
        max_attempts,
        budget: TokenBudget::new(args.max_tokens),
        parallel: true,
    };
    let outcomes = run_docket(&docket, &bench, &court);
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    write_jsonl(&args.out, &outcomes).map_err(anyhow::Error::from)?;
    let failed = outcomes.iter().filter(|o| o.error.is_some()).count();
    println!(
        "simulated {} cases with {} agents ({failed} failed) into {}",
        outcomes.len(),
        bench.len(),
        args.out.display()
    );
    Ok(())
}

fn evaluate_cmd(args: &EvaluateArgs, config: &RunConfig, seed: u64) -> CmdResult {
    if args.resamples < 100 {
        return Err(anyhow!("--resamples must be at least 100").into());
    }
    let corpus_dir = args.corpus_dir.clone().or_else(|| config.corpus_dir.clone());
    let truth_path = match (&args.truth, &corpus_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => dir.join(CASES_FILE),
        (None, None) => return Err(anyhow!("missing --truth (or --corpus-dir)").into()),
    };
    let out = out_dir(&args.out_dir, config)?;
    let outcomes: Vec<SimulationOutcome> = read_jsonl(&args.outcomes).map_err(anyhow::Error::from)?;
    let truth: Vec<Case> = read_jsonl(&truth_path).map_err(anyhow::Error::from)?;

    let anti_overturn_freq = match &corpus_dir {
        Some(dir) if dir.join(VOTES_FILE).exists() => {
            let cases: Vec<Case> = read_jsonl(&dir.join(CASES_FILE))?;
            let votes: Vec<JusticeVote> = read_jsonl(&dir.join(VOTES_FILE))?;
            Some(anti_overturn_frequency(&cases, &votes, ALIGNMENT_YEARS))
        }
        _ => None,
    };
    let baseline = match &args.baseline {
        Some(path) => Some(read_jsonl::<SimulationOutcome>(path).map_err(anyhow::Error::from)?),
        None => None,
    };
    let extras = EvaluationExtras {
        anti_overturn_freq,
        baseline,
        effect_d_override: args.effect_d,
        resamples: args.resamples,
        seed,
    };
    let report = evaluate(&outcomes, &truth, &extras).map_err(anyhow::Error::from)?;
    write_json(&out.join("report.json"), &report)?;
    let table = report.render_table();
    write_text(&out.join("table.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn correlate(args: &CorrelateArgs, config: &RunConfig) -> CmdResult {
    let corpus_dir = pick(&args.corpus_dir, &config.corpus_dir, "corpus-dir")?;
    let bench = resolve_bench(&args.bench, config)?.unwrap_or_else(roberts_iv);
    if bench.len() < 2 {
        return Err(anyhow!("correlation needs at least two justices, got {}", bench.len()).into());
    }
    let out = out_dir(&args.out_dir, config)?;
    let mut votes: Vec<JusticeVote> = read_jsonl(&corpus_dir.join(VOTES_FILE))?;
    if let Some(tag) = args.court_tag.clone().or_else(|| config.court_tag.clone()) {
        let cases: Vec<Case> = read_jsonl(&corpus_dir.join(CASES_FILE))?;
        let keep: HashSet<&str> = cases
            .iter()
            .filter(|c| same_court(&c.natural_court, &tag))
            .map(|c| c.case_id.as_str())
            .collect();
        votes.retain(|v| keep.contains(v.case_id.as_str()));
    }
    let matrix = vote_correlation_matrix(&votes, &bench).map_err(anyhow::Error::from)?;
    write_text(&out.join("matrix.csv"), &matrix.to_csv())?;
    let heat = matrix.render_heat_table();
    write_text(&out.join("heat.txt"), &heat)?;
    print!("{heat}");
    Ok(())
}
