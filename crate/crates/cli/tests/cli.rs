use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_folmt");

fn folmt(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares with a golden file; `FOLMT_BLESS=1` rewrites it instead.
fn assert_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("FOLMT_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} differs from the golden file");
}

#[test]
fn normalize_de_morgan() {
    let dir = tempfile::tempdir().unwrap();
    let o = folmt(dir.path(), &["normalize", "-(P(a) & Q(b))"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "(-P(a) | -Q(b))");
    assert_eq!(lines[1], "trace: 1 step");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("1\tMR-E1.2\t"));
}

#[test]
fn parse_echoes_the_tree() {
    let dir = tempfile::tempdir().unwrap();
    let o = folmt(dir.path(), &["parse", "forall x. (P(x) -> Q(x))"]);
    assert_eq!(stdout(&o), "forall x. (P(x) -> Q(x))\nforall x\n  implies\n    P(x)\n    Q(x)\n");
    let o = folmt(dir.path(), &["parse", "--format", "json", "P(a) & -Q(b)"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ast"]["and"][1]["not"]["atom"], "Q");
    let o = folmt(dir.path(), &["parse", "P(a) &"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_reports_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    for (id, want) in [("desk-001", "Unknown"), ("desk-002", "True"), ("desk-003", "False"), ("desk-004", "Unknown")] {
        let o = folmt(dir.path(), &["check", "--record", id, "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["label"], want, "{id}");
        assert_eq!(v["gold"], want, "{id}");
    }
    let o = folmt(dir.path(), &["check", "--premise", "-P(a)", "--conclusion", "P(a)"]);
    assert!(stdout(&o).starts_with("False (exact)"));
}

#[test]
fn transform_with_a_scripted_translator() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
[[suts]]
name = "translator"
adapter = "mock"

[suts.mock_translations]
"forall x. (-ResidentOf(x, lawtonPark) | UseZipCode(x, num98199))" = "For every person, either they are not a citizen of Lawton Park, or they use the zip code 98199."
"#;
    std::fs::write(dir.path().join("folmt.toml"), config).unwrap();
    let o = folmt(
        dir.path(),
        &["--config", "folmt.toml", "transform", "--mr", "E1_1", "--record", "desk-001", "--translator", "translator", "--format", "json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let g: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let f = &g["follow_up"];
    let expected = [
        "Lawton Park is a neighborhood in Seattle.",
        "For every person, either they are not a citizen of Lawton Park, or they use the zip code 98199.",
        "Tom is a citizen of Lawton Park.",
        "Daniel uses the zip code 98199.",
    ];
    assert_eq!(f["premises_nl"], serde_json::json!(expected));
    assert_eq!(f["premises_fol"][1], "forall x. (-ResidentOf(x, lawtonPark) | UseZipCode(x, num98199))");
    assert_eq!(f["conclusion_nl"], "Tom is a citizen of Washington.");
    assert_eq!(f["label"], "Unknown");
}

#[test]
fn mock_pipeline_matches_golden_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = folmt(d, &["generate", "--seed", "2024"]);
    assert_eq!(gen.status.code(), Some(0), "{}", stderr(&gen));
    let pool = std::fs::read(d.join("pool.jsonl")).unwrap();
    // Same inputs and seed, same bytes.
    folmt(d, &["generate", "--seed", "2024", "--out", "pool2.jsonl"]);
    assert_eq!(pool, std::fs::read(d.join("pool2.jsonl")).unwrap());

    let s = folmt(d, &["sample", "--seed", "2024"]);
    assert_eq!(s.status.code(), Some(0), "{}", stderr(&s));
    assert!(stderr(&s).contains("below the minimum of 385"));
    let r = folmt(d, &["run", "--sut", "mock-flip-c", "--sut", "mock-gold", "--strategy", "few-shot-cot"]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    let again = folmt(d, &["run", "--sut", "mock-flip-c", "--sut", "mock-gold", "--strategy", "few-shot-cot"]);
    assert!(stdout(&again).starts_with("issued 0,"), "{}", stdout(&again));

    let text = folmt(d, &["report"]);
    assert_eq!(text.status.code(), Some(1));
    assert_golden("report.txt", &stdout(&text));
    let csv = folmt(d, &["report", "--format", "csv", "--out", "out/report.csv"]);
    assert_eq!(csv.status.code(), Some(1));
    assert_golden("report.csv", &std::fs::read_to_string(d.join("out/report.csv")).unwrap());
    let json = folmt(d, &["report", "--format", "structured"]);
    assert_golden("report.json", &stdout(&json));

    let gold_only = folmt(d, &["run", "--sut", "mock-gold", "--log", "gold.jsonl"]);
    assert_eq!(gold_only.status.code(), Some(0));
    assert_eq!(folmt(d, &["report", "--log", "gold.jsonl"]).status.code(), Some(0));
}

#[test]
fn audit_writes_findings() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    folmt(d, &["generate", "--seed", "3", "--mr", "C1,C3,E1_1"]);
    folmt(d, &["sample", "--seed", "3"]);
    folmt(d, &["run", "--sut", "mock-flip-c"]);
    let o = folmt(d, &["audit", "--sample", "25", "--seed", "9", "--out", "audit.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("inspected 25, drift 0, parse 0, FRR 0.00%"), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("audit.json")).unwrap()).unwrap();
    assert_eq!(v["findings"].as_array().unwrap().len(), 25);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = folmt(d, &["generate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`seed`"));
    assert_eq!(folmt(d, &["transform", "--mr", "E9_9"]).status.code(), Some(2));
    assert_eq!(folmt(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(folmt(d, &["report"]).status.code(), Some(2));

    std::fs::write(d.join("bad.toml"), "seed = 1\nsede = 2\n").unwrap();
    let o = folmt(d, &["--config", "bad.toml", "generate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sede"), "{}", stderr(&o));

    std::fs::write(d.join("ok.toml"), "seed = 1\n[paths]\npool = \"p/pool.jsonl\"\n").unwrap();
    let o = folmt(d, &["--config", "ok.toml", "generate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.join("p/pool.jsonl").exists());
}

#[test]
fn unreachable_endpoint_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Bind and drop a listener to get a port nothing listens on.
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let config = format!(
        r#"
seed = 5
[[suts]]
name = "remote"
adapter = "openai-chat"
endpoint = "http://127.0.0.1:{port}/v1/chat/completions"
model_id = "m"
max_retries = 1
backoff_ms = 1
timeout_secs = 2
"#
    );
    std::fs::write(d.join("c.toml"), config).unwrap();
    folmt(d, &["--config", "c.toml", "generate", "--mr", "C1"]);
    folmt(d, &["--config", "c.toml", "sample", "--cap", "2"]);
    let o = folmt(d, &["--config", "c.toml", "run"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("rerun to retry"));
}
