use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const NOW: &str = "2024-01-02T03:04:05Z";

fn twinmat(args: &[&str]) -> Output {
    twinmat_with_input(args, "")
}

fn twinmat_with_input(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_twinmat"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn exact_score_prints_fraction_and_decimal() {
    let o = twinmat(&["score", "--fixture", "google-map", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("L_DT: 85/132 (0.643939393939)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn human_score_uses_two_decimals() {
    let o = twinmat(&["score", "--fixture", "tesla"]);
    assert!(stdout(&o).contains("L_DT: 0.69\n"));
}

#[test]
fn json_score_has_only_data() {
    let o = twinmat(&["score", "--fixture", "lu2020", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["overall"]["rational"], "43/90");
    assert_eq!(v["rounding_policy"], "Exact");
    assert!(stderr(&o).is_empty());
}

#[test]
fn csv_score_is_a_series() {
    let o = twinmat(&["score", "--fixture", "liu2021", "--format", "csv"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "subject,dimension,maturity,normalized_weight,quadrant"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("liu2021,Lc,"));
}

#[test]
fn refused_gate_exits_one() {
    let o = twinmat(&["gate", "--fixture", "living-heart"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("taxonomy: DigitalModel"));

    let o = twinmat(&["gate", "--fixture", "monitoring-shadow", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["taxonomy"], "DigitalShadow");

    let o = twinmat(&["gate", "--gate", "yes"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASSED"));
}

#[test]
fn scoring_a_refused_subject_is_a_domain_failure() {
    let o = twinmat(&["score", "--fixture", "emma-twin", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["code"], "GateRefusal");
}

#[test]
fn builtin_model_validates() {
    let o = twinmat(&["model-validate", "builtin.model"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 violations"));
}

#[test]
fn broken_model_lists_violations() {
    let dir = tempfile::tempdir().unwrap();
    let mut model: Value = serde_json::from_str(&twinmat_core::schema::serialize_model(
        &twinmat_core::builtin_paper_model(),
    ))
    .unwrap();
    model["dimensions"][1]["key"] = model["dimensions"][0]["key"].clone();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, model.to_string()).unwrap();

    let o = twinmat(&["model-validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("duplicate-dimension-key"));
    assert!(stdout(&o).contains("1 violation\n"));

    std::fs::write(&path, "{ not json").unwrap();
    let o = twinmat(&["model-validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[ParseError]"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["score"],
        vec!["score", "--fixture", "nope"],
        vec!["frobnicate"],
        vec!["gate", "--fixture", "tesla", "--format", "csv"],
        vec!["score", "--fixture", "tesla", "--fixture", "lu2020"],
        vec!["report", "--fixture", "tesla"],
        vec!["assess", "--subject", "x"],
    ] {
        let o = twinmat(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(twinmat(&["--help"]).status.code(), Some(0));
}

fn assess_flags(ws: &Path) -> Vec<String> {
    [
        "assess",
        "--workspace",
        ws.to_str().unwrap(),
        "--now",
        NOW,
        "--subject",
        "Pump line",
        "--gate",
        "yes",
        "--levels",
        "Cap=2,Cor=1,Com=2,Lc=1",
        "--weights",
        "Cap=5,Cor=2,Com=4,Lc=4",
        "--no-input",
        "--format",
        "json",
    ]
    .map(String::from)
    .to_vec()
}

#[test]
fn scripted_assess_then_score_records_history() {
    let dir = tempfile::tempdir().unwrap();
    let args = assess_flags(dir.path());
    let o = twinmat(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stored = json(&o);
    assert_eq!(stored["timestamp"], NOW);
    let id = stored["id"].as_str().unwrap().to_owned();

    let ws = dir.path().to_str().unwrap();
    let o = twinmat(&[
        "score",
        "--workspace",
        ws,
        "--assessment",
        &id,
        "--exact",
        "--now",
        NOW,
    ]);
    assert!(stdout(&o).contains("43/90"));

    let history =
        std::fs::read_to_string(dir.path().join("history").join(format!("{id}.jsonl"))).unwrap();
    assert_eq!(history.lines().count(), 1);
    let line: Value = serde_json::from_str(history.lines().next().unwrap()).unwrap();
    assert_eq!(line["recorded_at"], NOW);

    // json output parses back with the store's document types
    let o = twinmat(&[
        "score",
        "--workspace",
        ws,
        "--assessment",
        &id,
        "--format",
        "json",
    ]);
    let report: twinmat_core::ScoreReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report.subject, "Pump line");

    let o = twinmat(&[
        "compare",
        "--workspace",
        ws,
        "--assessment",
        &id,
        "--fixture",
        "lu2020",
        "--format",
        "json",
    ]);
    let cmp = json(&o);
    assert_eq!(cmp["ranking"][0]["tied"], true);
}

#[test]
fn identical_invocations_give_identical_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let strip_id = |o: &Output| {
        let mut v = json(o);
        v.as_object_mut().unwrap().remove("id");
        v
    };
    let oa = twinmat(
        &assess_flags(a.path())
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>(),
    );
    let ob = twinmat(
        &assess_flags(b.path())
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>(),
    );
    assert_eq!(strip_id(&oa), strip_id(&ob));
}

#[test]
fn interactive_assess_reads_prompts() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().to_str().unwrap();
    let script = "Glass line\ny\ny\ny\ny\ny\ny\n3\n2\n2\n2\n4\n2\n3\n1\n";
    let o = twinmat_with_input(&["assess", "--workspace", ws, "--now", NOW], script);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("Medium-High"));
    let id = text
        .lines()
        .last()
        .unwrap()
        .strip_prefix("stored assessment ")
        .unwrap();

    let o = twinmat(&["score", "--workspace", ws, "--assessment", id, "--exact"]);
    assert!(stdout(&o).contains("L_DT: 7/10"));
}

#[test]
fn interactive_assess_stops_on_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().to_str().unwrap();
    let o = twinmat_with_input(
        &["assess", "--workspace", ws, "--subject", "Heart"],
        "y\ny\ny\ny\nn\nn\n",
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("Digital Model"));
    assert_eq!(
        std::fs::read_dir(dir.path().join("assessments"))
            .unwrap()
            .count(),
        0
    );

    let o = twinmat_with_input(&["assess", "--workspace", ws], "Half\ny\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = twinmat(&[
        "report",
        "--fixture",
        "google-map",
        "--fixture",
        "tesla",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
    let svg = std::fs::read_to_string(out.join("comparison.svg")).unwrap();
    assert_eq!(svg.matches("class=\"subject\"").count(), 2);
}

#[test]
fn score_from_file_with_external_model() {
    let dir = tempfile::tempdir().unwrap();
    let a = twinmat_core::fixtures::fixture("tesla").unwrap();
    let path = dir.path().join("tesla.json");
    std::fs::write(&path, serde_json::to_string(&a).unwrap()).unwrap();
    let model_path = dir.path().join("model.json");
    std::fs::write(
        &model_path,
        twinmat_core::schema::serialize_model(&twinmat_core::builtin_paper_model()),
    )
    .unwrap();
    let o = twinmat(&[
        "score",
        "--file",
        path.to_str().unwrap(),
        "--model",
        model_path.to_str().unwrap(),
        "--exact",
    ]);
    assert!(stdout(&o).contains("29/42"), "{}", stderr(&o));
}

#[test]
fn locked_workspace_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let _held = twinmat_core::Workspace::open_writer(dir.path()).unwrap();
    let mut args = assess_flags(dir.path());
    args.retain(|a| a != "--format" && a != "json");
    let o = twinmat(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("LockHeld"));

    let o = twinmat(&[
        "serve",
        "--workspace",
        dir.path().to_str().unwrap(),
        "--addr",
        "127.0.0.1:0",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn in_process_run_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = twinmat_cli::run(
        [
            "twinmat",
            "score",
            "--fixture",
            "google-map",
            "--format",
            "json",
        ],
        &mut "".as_bytes(),
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    let bin = twinmat(&["score", "--fixture", "google-map", "--format", "json"]);
    assert_eq!(out, bin.stdout);
}
