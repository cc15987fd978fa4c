use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

fn qfano(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfano"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

// One default database shared by every test in this file.
fn db_path() -> &'static Path {
    static DB: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    let (_, path) = DB.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("db.json");
        let o = qfano(&["enumerate", "--all", "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (dir, path)
    });
    path
}

fn db() -> &'static str {
    db_path().to_str().unwrap()
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(p).unwrap()
}

fn case(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("cases")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn tables_match_golden_files() {
    for t in ["q3", "q4", "q5", "q6", "q7", "q8"] {
        let o = qfano(&["table", "--case", t, "--db", db()]);
        assert!(o.status.success());
        assert_eq!(stdout(&o), golden(&format!("{t}.txt")), "table {t}");
    }
}

#[test]
fn table_row_counts() {
    for (t, n) in [("q6", 2), ("q8", 7), ("q3", 13)] {
        let o = qfano(&["table", "--case", t, "--db", db(), "--format", "json"]);
        let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(rows.as_array().unwrap().len(), n, "{t}");
    }
}

#[test]
fn enumerate_counts_and_single_index_file() {
    let o = qfano(&["enumerate", "--all", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["total"], 464);

    let o = qfano(&[
        "enumerate",
        "--all",
        "--filter-set",
        "uncapped",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["total"], 472);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q9.json");
    let o = qfano(&[
        "enumerate",
        "--q",
        "9",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["candidates"].as_array().unwrap().len(), 2);
    assert_eq!(v["config"]["index_set"], serde_json::json!([9]));
}

#[test]
fn exit_codes() {
    assert_eq!(qfano(&["enumerate", "--q", "20"]).status.code(), Some(2));
    assert_eq!(qfano(&["enumerate"]).status.code(), Some(2));
    assert_eq!(
        qfano(&["enumerate", "--q", "9", "--filter-set", "nonsense"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qfano(&["table", "--case", "q6", "--db", "/nonexistent/db.json"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(qfano(&["table", "--case", "q6"]).status.code(), Some(3));
    assert_eq!(qfano(&["facts"]).status.code(), Some(3));
    assert_eq!(
        qfano(&["link", "solve", "/nonexistent.case", "--db", db()])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        qfano(&[
            "wps",
            "check",
            "--weights",
            "1,2,3",
            "--degree",
            "9",
            "--db",
            db()
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn table_needs_its_index_in_the_database() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q9.json");
    qfano(&["enumerate", "--q", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(
        qfano(&["table", "--case", "q6", "--db", out.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn export_roundtrip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let again = dir.path().join("again.json");
    let o = qfano(&["export", "--db", db(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read(db_path()).unwrap(),
        std::fs::read(&again).unwrap()
    );

    let csv = stdout(&qfano(&["export", "--db", db(), "--format", "csv"]));
    assert_eq!(csv.lines().count(), 465);
}

#[test]
fn wps_check_reports_the_match() {
    let o = qfano(&[
        "wps",
        "check",
        "--weights",
        "1,2,3,5,7",
        "--degree",
        "10",
        "--db",
        db(),
    ]);
    let text = stdout(&o);
    assert!(text.contains("q = 8, A^3 = 1/21"), "{text}");
    assert!(text.contains("matches candidate q8/3:1,7:3/1/21"), "{text}");

    let o = qfano(&[
        "wps",
        "check",
        "--model",
        "X_6 in P(1,2,2,3,5)",
        "--db",
        db(),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["matches"], serde_json::json!(["q7/2:1,2:1,2:1,5:1/1/10"]));
}

#[test]
fn link_solve_reports() {
    let o = qfano(&["link", "solve", &case("q9_4A.case"), "--db", db()]);
    let text = stdout(&o);
    assert!(text.contains("feasible qhat values: {5,6,7,8}"), "{text}");

    let o = qfano(&[
        "link",
        "solve",
        &case("q6_basket7.case"),
        "--db",
        db(),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["eliminated"], true);
}

#[test]
fn facts_include_high_index_bound() {
    let text = stdout(&qfano(&["facts", "--db", db()]));
    assert!(
        text.lines().any(|l| l.starts_with("q ≥ 8 ⇒ dim|A| ≤ 0")),
        "{text}"
    );
    assert!(text.contains("exactly one class satisfies q ≥ 5 and dim|A| ≥ 2: q=5 (2) A^3=1/2"));
    assert!(text.contains("exactly one class satisfies q = 7 and dim|A| ≥ 1: q=7 (2,3) A^3=1/6"));
}

#[test]
fn diff_isolates_the_degree_cap() {
    let o = qfano(&["diff", "--against", "uncapped", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["only_in_base"].as_array().unwrap().len(), 0);
    let gained = v["only_in_against"].as_array().unwrap();
    assert_eq!(gained.len(), 8);
    for c in gained {
        let k3: qfano::arith::Rational = c["minus_k3"].as_str().unwrap().parse().unwrap();
        assert!(k3 > qfano::arith::Rational::new(125, 2));
    }
}
