use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scotus_sim::corpus::synthetic::{generate, SyntheticSpec};
use scotus_sim::justices::ROBERTS_IV;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scotus-sim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Synthetic fixture ingested into `<root>/corpus`.
struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
    corpus: PathBuf,
}

fn ingested(n_cases: usize) -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let corpus = generate(&SyntheticSpec {
        n_cases,
        ..SyntheticSpec::default()
    });
    let paths = corpus.write_fixture(&root.join("raw")).unwrap();
    let out_dir = root.join("corpus");
    let out = run(&[
        "ingest",
        "--cases",
        s(&paths.cases_csv),
        "--votes",
        s(&paths.votes_csv),
        "--opinion-dir",
        s(&paths.opinion_dir),
        "--manifest",
        s(&paths.manifest),
        "--out-dir",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    Workspace {
        _dir: dir,
        root,
        corpus: out_dir,
    }
}

fn write_profile(path: &Path, accuracy: Option<f64>) {
    let mut map = serde_json::Map::new();
    for (i, j) in ROBERTS_IV.iter().enumerate() {
        let mut spec = serde_json::json!({ "approve_rate": 0.5, "seed": i });
        if let Some(a) = accuracy {
            spec["accuracy"] = a.into();
        }
        map.insert(j.to_string(), spec);
    }
    std::fs::write(path, serde_json::to_string_pretty(&map).unwrap()).unwrap();
}

fn split_docket(ws: &Workspace) -> PathBuf {
    let out_dir = ws.root.join("split");
    let out = run(&["split", "--corpus-dir", s(&ws.corpus), "--out-dir", s(&out_dir), "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    out_dir.join("docket.jsonl")
}

fn simulate(docket: &Path, profile: &Path, out: &Path, seed: &str) -> Output {
    run(&[
        "simulate",
        "--docket",
        s(docket),
        "--stub-profile",
        s(profile),
        "--seed",
        seed,
        "--out",
        s(out),
    ])
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_documents_every_subcommand() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let cases: [(&str, &[&str]); 6] = [
        ("ingest", &["--cases", "--votes", "--opinion-dir", "--manifest", "--out-dir"]),
        ("build-train", &["--corpus-dir", "--court-tag", "--bench", "--test-size", "--max-tokens"]),
        ("split", &["--corpus-dir", "--test-size", "--out-dir"]),
        ("simulate", &["--docket", "--registry", "--stub-profile", "--max-attempts", "--temperature", "--out"]),
        ("evaluate", &["--outcomes", "--truth", "--baseline", "--effect-d", "--resamples"]),
        ("correlate", &["--corpus-dir", "--bench", "--out-dir"]),
    ];
    for (cmd, flags) in cases {
        let out = run(&[cmd, "--help"]);
        assert_eq!(code(&out), 0, "{cmd}");
        let text = String::from_utf8_lossy(&out.stdout);
        for flag in flags.iter().chain(&["--seed", "--config"]) {
            assert!(text.contains(flag), "{cmd} --help lacks {flag}");
        }
    }
}

#[test]
fn ingest_is_byte_deterministic() {
    let ws = ingested(40);
    let again = ws.root.join("corpus2");
    let raw = ws.root.join("raw");
    let out = run(&[
        "ingest",
        "--cases",
        s(&raw.join("cases.csv")),
        "--votes",
        s(&raw.join("votes.csv")),
        "--opinion-dir",
        s(&raw.join("opinions")),
        "--manifest",
        s(&raw.join("manifest.jsonl")),
        "--out-dir",
        s(&again),
    ]);
    assert_eq!(code(&out), 0);
    for f in ["corpus.jsonl", "votes.jsonl", "opinions.jsonl", "skip_report.jsonl"] {
        assert_eq!(
            std::fs::read(ws.corpus.join(f)).unwrap(),
            std::fs::read(again.join(f)).unwrap(),
            "{f}"
        );
    }
    let cases = std::fs::read_to_string(ws.corpus.join("corpus.jsonl")).unwrap();
    assert_eq!(cases.lines().count(), 40);
}

#[test]
fn ingest_missing_column_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = dir.path().join("cases.csv");
    let votes = dir.path().join("votes.csv");
    std::fs::write(&cases, "caseId,term,naturalCourt,issueArea,precedentAlteration,dateDecision\n").unwrap();
    std::fs::write(&votes, "caseId,justiceName,vote,majority\n").unwrap();
    let out = run(&[
        "ingest",
        "--cases",
        s(&cases),
        "--votes",
        s(&votes),
        "--out-dir",
        s(&dir.path().join("out")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("partyWinning"));
}

#[test]
fn build_train_writes_disjoint_sets() {
    let ws = ingested(120);
    let out_dir = ws.root.join("train_out");
    let args = [
        "build-train",
        "--corpus-dir",
        s(&ws.corpus),
        "--out-dir",
        s(&out_dir),
        "--test-size",
        "30",
        "--seed",
        "11",
    ];
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let split = read_json(&out_dir.join("split.json"));
    let test: Vec<&str> = split["test"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(test.len(), 30);
    for id in split["train_base"].as_array().unwrap() {
        assert!(!test.contains(&id.as_str().unwrap()));
    }
    for docs in split["train_per_justice"].as_object().unwrap().values() {
        for d in docs.as_array().unwrap() {
            assert!(!test.contains(&d["case_id"].as_str().unwrap()));
        }
    }
    for j in ROBERTS_IV {
        assert!(out_dir.join("train").join(format!("{j}.jsonl")).exists(), "{j}");
    }
    let base = std::fs::read_to_string(out_dir.join("train/base.jsonl")).unwrap();
    for line in base.lines() {
        let text = serde_json::from_str::<Value>(line).unwrap()["text"].as_str().unwrap().to_string();
        assert!(text.starts_with("{\n 'issue': '"));
        assert!(text.ends_with("'\n}\n"));
    }

    let before = std::fs::read(out_dir.join("split.json")).unwrap();
    assert_eq!(code(&run(&args)), 0);
    assert_eq!(before, std::fs::read(out_dir.join("split.json")).unwrap());
}

#[test]
fn simulate_stub_is_deterministic_with_96_outcomes() {
    let ws = ingested(160);
    let docket = split_docket(&ws);
    let profile = ws.root.join("profile.json");
    write_profile(&profile, None);
    let a = ws.root.join("a.jsonl");
    let b = ws.root.join("b.jsonl");
    assert_eq!(code(&simulate(&docket, &profile, &a, "7")), 0);
    assert_eq!(code(&simulate(&docket, &profile, &b, "7")), 0);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 96);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["per_justice"].as_object().unwrap().len(), 9);

    let c = ws.root.join("c.jsonl");
    assert_eq!(code(&simulate(&docket, &profile, &c, "8")), 0);
    assert_ne!(text, std::fs::read_to_string(&c).unwrap());
}

#[test]
fn simulate_dead_registry_exits_3() {
    let ws = ingested(20);
    let docket = split_docket(&ws);
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    drop(listener);
    let registry = ws.root.join("registry.json");
    let entries: Vec<Value> = ["SAAlito", "EKagan"]
        .iter()
        .map(|j| {
            serde_json::json!({
                "justice_id": j,
                "endpoint": format!("http://127.0.0.1:{port}"),
                "request_timeout_ms": 500
            })
        })
        .collect();
    std::fs::write(&registry, serde_json::to_string(&entries).unwrap()).unwrap();
    let out = run(&[
        "simulate",
        "--docket",
        s(&docket),
        "--registry",
        s(&registry),
        "--out",
        s(&ws.root.join("o.jsonl")),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    let mismatched = run(&[
        "simulate",
        "--docket",
        s(&docket),
        "--registry",
        s(&registry),
        "--bench",
        "SAAlito",
        "--out",
        s(&ws.root.join("o.jsonl")),
    ]);
    assert_eq!(code(&mismatched), 2);
}

fn evaluate(ws: &Workspace, outcomes: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let out_dir = ws.root.join("eval");
    let mut args = vec![
        "evaluate",
        "--outcomes",
        s(outcomes),
        "--corpus-dir",
        s(&ws.corpus),
        "--out-dir",
        s(&out_dir),
        "--resamples",
        "200",
    ];
    args.extend_from_slice(extra);
    (run(&args), out_dir)
}

#[test]
fn evaluate_reports_and_exit_codes() {
    let ws = ingested(160);
    let docket = split_docket(&ws);
    let perfect = ws.root.join("perfect.json");
    write_profile(&perfect, Some(1.0));
    let outcomes = ws.root.join("perfect.jsonl");
    assert_eq!(code(&simulate(&docket, &perfect, &outcomes, "1")), 0);

    let (out, dir) = evaluate(&ws, &outcomes, &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.join("report.json"));
    assert_eq!(report["accuracy"].as_f64(), Some(1.0));
    assert_eq!(report["n_cases"].as_u64(), Some(96));
    assert!(report.get("effect_d").is_none());
    assert!(std::fs::read_to_string(dir.join("table.txt")).unwrap().contains("Aggregate"));

    let coin = ws.root.join("coin.json");
    write_profile(&coin, None);
    let baseline = ws.root.join("baseline.jsonl");
    assert_eq!(code(&simulate(&docket, &coin, &baseline, "1")), 0);
    let (out, dir) = evaluate(&ws, &outcomes, &["--baseline", s(&baseline)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.join("report.json"));
    assert!(report.get("overlap").is_some());
    assert!(report["baseline"].get("effect_d").is_some());
    assert!(report["baseline"].get("overlap").is_some());

    let (out, dir) = evaluate(&ws, &outcomes, &["--effect-d", "0.19"]);
    assert_eq!(code(&out), 0);
    let report = read_json(&dir.join("report.json"));
    assert!((report["overlap"].as_f64().unwrap() - 0.924).abs() < 5e-4);

    let empty_truth = ws.root.join("empty.jsonl");
    std::fs::write(&empty_truth, "").unwrap();
    let (out, _) = evaluate(&ws, &outcomes, &["--truth", s(&empty_truth)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("truth"));
}

#[test]
fn evaluate_is_byte_deterministic() {
    let ws = ingested(160);
    let docket = split_docket(&ws);
    let profile = ws.root.join("p.json");
    write_profile(&profile, Some(0.6));
    let outcomes = ws.root.join("o.jsonl");
    assert_eq!(code(&simulate(&docket, &profile, &outcomes, "5")), 0);
    let (_, dir) = evaluate(&ws, &outcomes, &["--seed", "9"]);
    let first = std::fs::read(dir.join("report.json")).unwrap();
    let (_, dir) = evaluate(&ws, &outcomes, &["--seed", "9"]);
    assert_eq!(first, std::fs::read(dir.join("report.json")).unwrap());
}

#[test]
fn correlate_writes_matrix_and_rejects_single_justice() {
    let ws = ingested(120);
    let out_dir = ws.root.join("corr");
    let out = run(&["correlate", "--corpus-dir", s(&ws.corpus), "--out-dir", s(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("matrix.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 10);
    for (i, line) in lines[1..].iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 10);
        assert_eq!(cells[i + 1], "1.000000");
    }
    assert!(out_dir.join("heat.txt").exists());

    let single = run(&[
        "correlate",
        "--corpus-dir",
        s(&ws.corpus),
        "--bench",
        "SAAlito",
        "--out-dir",
        s(&out_dir),
    ]);
    assert_eq!(code(&single), 2);
}

#[test]
fn config_file_supplies_paths_and_seed() {
    let ws = ingested(120);
    let config = ws.root.join("run.json");
    let out_dir = ws.root.join("from_config");
    std::fs::write(
        &config,
        serde_json::json!({
            "corpus_dir": ws.corpus,
            "out_dir": out_dir,
            "seed": 4,
            "court_tag": "Roberts IV"
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&["split", "--config", s(&config), "--test-size", "10"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let by_config = std::fs::read(out_dir.join("split.json")).unwrap();

    let flags_dir = ws.root.join("from_flags");
    let out = run(&[
        "split",
        "--corpus-dir",
        s(&ws.corpus),
        "--out-dir",
        s(&flags_dir),
        "--seed",
        "4",
        "--test-size",
        "10",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(by_config, std::fs::read(flags_dir.join("split.json")).unwrap());

    std::fs::write(&config, r#"{"corpus_dir": "/no/such/dir"}"#).unwrap();
    assert_eq!(code(&run(&["split", "--config", s(&config)])), 2);
}
