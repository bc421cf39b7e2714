//! End-to-end runs of the `humility-lab` binary.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use humility_experiment::{ExperimentConfig, ExperimentService};

fn lab(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_humility-lab")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn synthetic_corpus_through_every_pipeline_stage() {
    let d = tempfile::tempdir().unwrap();
    let (raw, labeled, sampled) = (p(d.path(), "raw.jsonl"), p(d.path(), "labeled.jsonl"), p(d.path(), "s.jsonl"));
    lab(&["--seed", "4", "synth", "--users", "80", "--out", &raw]);
    lab(&["classify", "--input", &raw, "--out", &labeled]);
    let first = std::fs::read(&labeled).unwrap();
    assert!(String::from_utf8_lossy(&first).contains("\"label\":\"IA\""));

    lab(&["--seed", "9", "sample", "--input", &labeled, "--out", &sampled, "--fraction", "0.5"]);
    let again = p(d.path(), "s2.jsonl");
    lab(&["--seed", "9", "sample", "--input", &labeled, "--out", &again, "--fraction", "0.5"]);
    assert_eq!(std::fs::read(&sampled).unwrap(), std::fs::read(&again).unwrap());

    let envs = stdout(&lab(&["score-env", "--input", &labeled]));
    let class = |c: &str| envs.lines().skip(1).filter(|l| l.split_whitespace().nth(2) == Some(c)).count();
    assert_eq!((class("IH"), class("IA")), (5, 5), "{envs}");

    let group: serde_json::Value =
        serde_json::from_str(&stdout(&lab(&["group-users", "--input", &labeled, "--percentile", "0.5", "--json"])))
            .unwrap();
    assert!(!group["users"].as_array().unwrap().is_empty());

    let paired = stdout(&lab(&["paired-tests", "--input", &labeled, "--percentile", "1.0"]));
    assert!(paired.contains("Top 100%") && paired.contains("***"), "{paired}");

    let fit: serde_json::Value =
        serde_json::from_str(&stdout(&lab(&["fit", "--input", &labeled, "--model", "M4", "--json"]))).unwrap();
    assert_eq!(fit["converged"], true);
    assert_eq!(fit["terms"][0]["term"], "Env");
    assert!(fit["terms"][0]["coefficient"].as_f64().unwrap() > 0.0);

    let report = stdout(&lab(&["report", "--input", &labeled, "--percentile", "0.5", "--percentile", "1.0"]));
    assert!(report.contains("Bonferroni over 10 tests"), "{report}");
    assert!(!report.contains("not converged"), "{report}");
}

#[test]
fn ingest_filters_and_reports_skips() {
    let d = tempfile::tempdir().unwrap();
    let dump = d.path().join("dump.jsonl");
    let mut lines = vec![
        r#"{"id":"a","author":"u1","subreddit":"s","link_id":"t3_1","created_utc":1700000000,"body":"[deleted]"}"#
            .to_string(),
        r#"{"id":"b","author":"u1","subreddit":"s","link_id":"t3_1","created_utc":1700000001,"body":"ok"}"#.to_string(),
        "not json".to_string(),
    ];
    for i in 0..20 {
        lines.push(format!(
            r#"{{"id":"c{i}","author":"u2","subreddit":"s","link_id":"t3_1","created_utc":{},"body":"I think the border policy is not working well"}}"#,
            1700000002 + i
        ));
    }
    std::fs::write(&dump, lines.join("\n")).unwrap();
    let out = lab(&["ingest", "--input", dump.to_str().unwrap()]);
    let kept = stdout(&out);
    assert_eq!(kept.lines().count(), 20);
    assert!(kept.contains("\"topic\":\"immigration\""));
    let log = String::from_utf8_lossy(&out.stderr);
    assert!(log.contains("skipped line 3"), "{log}");
    assert!(log.contains("dropped 1: Deleted") && log.contains("dropped 1: TooShort"), "{log}");
}

#[test]
fn evaluate_prints_a_table_and_json() {
    let d = tempfile::tempdir().unwrap();
    let gold = d.path().join("gold.csv");
    std::fs::write(
        &gold,
        "id,body,gold_label\n1,\"I think so, but I'm not sure.\",IH\n2,Only an idiot says that.,IA\n\
         3,The vote is on Tuesday.,Neutral\n4,I am a bot and this was automatic.,Neutral\n",
    )
    .unwrap();
    let g = gold.to_str().unwrap();
    let table = stdout(&lab(&["evaluate", "--gold", g]));
    assert!(table.contains("lexicon_stub on 3 items"), "{table}");
    let json: serde_json::Value = serde_json::from_str(&stdout(&lab(&["evaluate", "--gold", g, "--json"]))).unwrap();
    assert_eq!(json["weighted_f1"], 1.0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&lab(&[
        "--seed",
        "2",
        "evaluate",
        "--gold",
        g,
        "--backend",
        "random-baseline",
        "--trials",
        "5",
        "--json",
    ])))
    .unwrap();
    assert_eq!(json["trials"], 5);
    assert!(json["ci95"]["weighted_f1"].is_array());
}

#[test]
fn rct_verbs_from_simulated_and_exported_data() {
    let d = tempfile::tempdir().unwrap();
    let rows = p(d.path(), "outcomes.csv");
    lab(&["--seed", "0", "rct", "simulate", "--out", &rows]);
    let text = stdout(&lab(&[
        "rct",
        "fit",
        "--outcomes",
        &rows,
        "--model",
        "interaction",
        "--outcome",
        "demonstrated",
        "--mode",
        "itt",
    ]));
    assert!(text.starts_with("Demonstrated IH (ITT)"), "{text}");
    assert!(text.contains("Cue x IA") && text.contains("N "), "{text}");
    let grid = stdout(&lab(&["rct", "report", "--outcomes", &rows, "--mode", "tot"]));
    assert!(grid.contains("Number of Comments") && grid.contains("Interaction + Cov"), "{grid}");

    // an experiment log written by the service, exported and scored
    let store = d.path().join("store");
    let cfg = ExperimentConfig { store_dir: Some(store.clone()), ..Default::default() };
    {
        let svc = ExperimentService::new(cfg).unwrap();
        for i in 0..6 {
            let id = svc.enroll(&format!("x{i}")).unwrap().session_id;
            svc.consent(&id).unwrap();
            let pre: humility_experiment::SurveyResponse = serde_json::from_value(serde_json::json!({
                "ih_items": [3, 4, 5, 6, 7, 8, 2, 3],
                "topics": {
                    "abortion": {"interest": 5, "stance": 9},
                    "climate": {"interest": 5, "stance": 6},
                    "immigration": {"interest": 5, "stance": 3}
                },
                "attention": {"select_7": 7}
            }))
            .unwrap();
            let threads = svc.submit_pre_survey(&id, pre).unwrap().threads;
            for t in &threads {
                for _ in 0..2 {
                    svc.submit_comment(&id, &t.id, "I think that could be right, but I'm not sure.", None).unwrap();
                }
            }
            let post = humility_experiment::SurveyResponse {
                ih_items: (1..=8).map(Some).collect(),
                attention: [("select_2".to_string(), 2)].into_iter().collect(),
                ..Default::default()
            };
            svc.submit_post_survey(&id, post).unwrap();
        }
    }
    let export = p(d.path(), "export");
    lab(&["export", "--store", store.to_str().unwrap(), "--out", &export]);
    let scored = stdout(&lab(&["rct", "outcomes", "--export", &export]));
    assert_eq!(scored.lines().count(), 7, "{scored}");
    let header: Vec<&str> = scored.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "demonstrated_ih").unwrap();
    for line in scored.lines().skip(1) {
        let v: f64 = line.split(',').nth(col).unwrap().parse().unwrap();
        assert_eq!(v, 1.0, "{line}");
    }
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn get(port: u16, path: &str) -> Option<String> {
    let mut s = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(s, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut body = String::new();
    s.read_to_string(&mut body).ok()?;
    Some(body)
}

#[test]
fn serve_answers_health_and_consent() {
    let port = free_port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_humility-lab"))
        .args(["serve", "--addr", &format!("127.0.0.1:{port}")])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(20);
    let health = loop {
        if let Some(r) = get(port, "/healthz") {
            break r;
        }
        assert!(Instant::now() < deadline, "server did not start");
        std::thread::sleep(Duration::from_millis(50));
    };
    let consent = get(port, "/consent").unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(health.starts_with("HTTP/1.1 200"), "{health}");
    assert!(consent.contains("Welcome to the Research Study!"));
}
