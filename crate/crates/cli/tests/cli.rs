//! End-to-end tests of the command-line interface: each test drives the
//! compiled binary over real files and checks the emitted reports, CSV, and
//! exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hnpers"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).expect("fixture files write");
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("the binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// "p/q" (or "p") parsed into a comparable fraction.
fn frac(s: &str) -> (i64, i64) {
    match s.split_once('/') {
        Some((p, q)) => (p.parse().unwrap(), q.parse().unwrap()),
        None => (s.parse().unwrap(), 1),
    }
}

fn frac_leq(a: &str, b: &str) -> bool {
    let (pa, qa) = frac(a);
    let (pb, qb) = frac(b);
    pa * qb <= pb * qa
}

const TWO_CHAIN: &str = r#"{
    "n": 1,
    "field": {"prime": 2},
    "generators": [["0"], ["0"]],
    "relations": [{"point": ["1"], "coeffs": ["1", "0"]}]
}"#;

const INTERVAL: &str = r#"{
    "n": 1,
    "field": {"prime": 2},
    "generators": [["0"]],
    "relations": [{"point": ["1"], "coeffs": ["1"]}]
}"#;

const INTERVAL_SHIFTED: &str = r#"{
    "n": 1,
    "field": {"prime": 2},
    "generators": [["1/4"]],
    "relations": [{"point": ["5/4"], "coeffs": ["1"]}]
}"#;

const ZERO_MODULE: &str = r#"{
    "n": 1,
    "field": {"prime": 2},
    "generators": [["0"]],
    "relations": [{"point": ["0"], "coeffs": ["1"]}]
}"#;

/// Unit point mass at the origin over the density 1 on [0, 1) with
/// geometric tails of ratio 1/2.
const SKY0: &str = r#"{
    "mode": "eval",
    "alpha": [{"point": ["0"], "coeff": "1"}],
    "beta": {"window": [["0", "1"]], "values": ["1"], "tails": [["1/2", "1/2"]]}
}"#;

#[test]
fn hn_reproduces_the_two_chain_example() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", TWO_CHAIN);
    let stab = write(dir.path(), "z.json", SKY0);
    let out = run(&[
        "hn",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--oracle",
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["field"], "F_2");
    assert_eq!(report["adapted_grid"], serde_json::json!([["0", "1"]]));
    assert_eq!(report["module_dims"], serde_json::json!([2, 1]));
    assert_eq!(report["alpha"], serde_json::json!(["1", "0"]));
    assert_eq!(report["beta"], serde_json::json!(["1", "1"]));
    assert_eq!(report["slopes"], serde_json::json!(["1", "1/2"]));
    assert_eq!(report["steps"], serde_json::json!([[1, 0], [2, 1]]));
    assert_eq!(report["hn_type"][0]["slope"], "1");
    assert_eq!(report["hn_type"][0]["dims"], serde_json::json!([1, 0]));
    assert_eq!(report["oracle_agrees"], true);
}

#[test]
fn hn_accepts_firep_text_and_matches_the_json_module() {
    let dir = tempfile::tempdir().unwrap();
    let firep = write(
        dir.path(),
        "m.firep",
        "# two generators, one relation\nfirep 1\n2\n1\n0\n0\n1 ; 1 0\n",
    );
    let json = write(dir.path(), "m.json", TWO_CHAIN);
    let stab = write(dir.path(), "z.json", SKY0);
    let from_firep = stdout_json(&run(&[
        "hn",
        "--module",
        firep.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
    ]));
    let from_json = stdout_json(&run(&[
        "hn",
        "--module",
        json.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
    ]));
    assert_eq!(from_firep["hn_type"], from_json["hn_type"]);
    assert_eq!(from_firep["slopes"], from_json["slopes"]);
}

#[test]
fn hn_of_the_zero_module_has_the_empty_type() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", ZERO_MODULE);
    let stab = write(dir.path(), "z.json", SKY0);
    let report = stdout_json(&run(&[
        "hn",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
    ]));
    assert_eq!(report["steps"], serde_json::json!([]));
    assert_eq!(report["slopes"], serde_json::json!([]));
    assert_eq!(report["hn_type"], serde_json::json!([]));
}

#[test]
fn hn_two_prime_cross_check_agrees_here() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", TWO_CHAIN);
    let stab = write(dir.path(), "z.json", SKY0);
    let report = stdout_json(&run(&[
        "hn",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--prime2",
        "3",
    ]));
    assert_eq!(report["second_field"]["field"], "F_3");
    assert_eq!(report["second_field"]["agrees"], true);
}

#[test]
fn oracle_refusal_is_a_budget_failure() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", TWO_CHAIN);
    let stab = write(dir.path(), "z.json", SKY0);
    let out = run(&[
        "hn",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--oracle",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr_text(&out));
    assert!(stderr_text(&out).contains("budget"));
}

#[test]
fn s_reproduces_closed_form_values() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", INTERVAL);
    let stab = write(dir.path(), "z.json", SKY0);
    let query = |x: &str, y: &str, theta: &str| -> String {
        let report = stdout_json(&run(&[
            "s",
            "--module",
            module.to_str().unwrap(),
            "--stab",
            stab.to_str().unwrap(),
            &format!("--x={x}"),
            &format!("--y={y}"),
            &format!("--theta={theta}"),
        ]));
        report["value"].as_str().unwrap().to_string()
    };
    // the surviving window shrinks with the threshold
    assert_eq!(query("1/2", "3/4", "2"), "1");
    assert_eq!(query("0", "1/2", "2"), "0");
    // incomparable pairs are infinite
    assert_eq!(query("1/2", "0", "2"), "inf");
    // far below every slope the invariant is the plain rank invariant
    assert_eq!(query("0", "1/2", "-1"), "1");
    assert_eq!(query("0", "1", "-1"), "0");
}

#[test]
fn s_csv_sampling_has_the_contract_columns() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", INTERVAL);
    let stab = write(dir.path(), "z.json", SKY0);
    let out = run(&[
        "s",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--theta=2",
        "--window=0..1",
        "--res=1/2",
    ]);
    assert!(out.status.success(), "{}", stderr_text(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x1,y1,theta,value");
    assert_eq!(lines.len(), 1 + 9, "3 lattice points give 9 pairs");
    assert!(lines.contains(&"1/2,1/2,2,1"));
    assert!(lines.contains(&"1/2,0,2,inf"));
    assert!(lines.contains(&"0,0,2,0"));
}

#[test]
fn s_profile_lists_the_slopes_at_a_shift() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", INTERVAL);
    let stab = write(dir.path(), "z.json", SKY0);
    let report = stdout_json(&run(&[
        "s",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--profile=1/2",
    ]));
    assert_eq!(report["x"], serde_json::json!(["1/2"]));
    assert_eq!(report["breakpoints"], serde_json::json!(["2", "0"]));
}

#[test]
fn s_skyscraper_types_per_grid_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", INTERVAL);
    let stab = write(dir.path(), "z.json", SKY0);
    let report = stdout_json(&run(&[
        "s",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--skyscraper",
    ]));
    let points = report["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[0]["point"], serde_json::json!(["0"]));
    assert_eq!(points[0]["hn_type"][0]["slope"], "1");
    assert_eq!(points[1]["point"], serde_json::json!(["1"]));
    assert_eq!(points[1]["hn_type"][0]["slope"], "0");
}

#[test]
fn distance_of_a_module_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", INTERVAL);
    let stab = write(dir.path(), "z.json", SKY0);
    let report = stdout_json(&run(&[
        "distance",
        "--module",
        module.to_str().unwrap(),
        "--module2",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--window=-1..2",
        "--res=1/2",
    ]));
    assert_eq!(report["hn_distance"], "0");
    assert_eq!(report["theta_strategy"], "auto");
    let per_theta = report["per_theta"].as_array().unwrap();
    assert!(!per_theta.is_empty());
    for entry in per_theta {
        assert_eq!(entry["erosion"], "0");
        assert_eq!(entry["landscape"], "0");
    }
}

#[test]
fn distance_of_a_quarter_shift_is_bounded_by_the_shift() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", INTERVAL);
    let b = write(dir.path(), "b.json", INTERVAL_SHIFTED);
    let stab = write(dir.path(), "z.json", SKY0);
    let report = stdout_json(&run(&[
        "distance",
        "--module",
        a.to_str().unwrap(),
        "--module2",
        b.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--window=-1..2",
        "--res=1/8",
    ]));
    let hn = report["hn_distance"].as_str().unwrap();
    assert!(frac_leq(hn, "1/4"), "hn distance {hn} exceeds the shift 1/4");
    assert!(frac_leq("1/8", hn), "a genuine shift cannot vanish, got {hn}");
    for entry in report["per_theta"].as_array().unwrap() {
        let erosion = entry["erosion"].as_str().unwrap();
        let landscape = entry["landscape"].as_str().unwrap();
        assert!(
            frac_leq(landscape, erosion),
            "landscape {landscape} exceeds erosion {erosion}"
        );
    }
}

#[test]
fn breakpoints_of_the_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", INTERVAL);
    let stab = write(dir.path(), "z.json", SKY0);
    let report = stdout_json(&run(&[
        "breakpoints",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--window=-2..2",
    ]));
    assert_eq!(report["region"], serde_json::json!(["-2", "2"]));
    assert_eq!(report["breakpoints"], serde_json::json!(["0", "1"]));
    let types = report["interval_types"].as_array().unwrap();
    assert_eq!(types.len(), 3);
    assert_eq!(types[0].as_array().unwrap().len(), 1);
    assert_eq!(types[1].as_array().unwrap().len(), 2);
    assert_eq!(types[1][0]["slope"], "2");
    assert_eq!(types[1][1]["slope"], "0");
    assert_eq!(types[2].as_array().unwrap().len(), 1);
}

#[test]
fn breakpoints_of_the_zero_module_are_empty() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", ZERO_MODULE);
    let stab = write(dir.path(), "z.json", SKY0);
    let report = stdout_json(&run(&[
        "breakpoints",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--window=-2..2",
    ]));
    assert_eq!(report["breakpoints"], serde_json::json!([]));
    assert_eq!(report["interval_types"], serde_json::json!([[]]));
}

#[test]
fn breakpoints_reject_two_parameter_modules() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(
        dir.path(),
        "m.json",
        r#"{
            "n": 2,
            "field": {"prime": 2},
            "generators": [["0", "0"]],
            "relations": []
        }"#,
    );
    let stab = write(
        dir.path(),
        "z.json",
        r#"{
            "mode": "eval",
            "alpha": [{"point": ["0", "0"], "coeff": "1"}],
            "beta": {
                "window": [["0", "1"], ["0", "1"]],
                "values": ["1"],
                "tails": [["1/2", "1/2"], ["1/2", "1/2"]]
            }
        }"#,
    );
    let out = run(&[
        "breakpoints",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--window=-2..2",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr_text(&out));
    assert!(stderr_text(&out).contains("supports n <= 1"));
}

#[test]
fn malformed_inputs_exit_with_the_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let stab = write(dir.path(), "z.json", SKY0);
    for bad in [
        write(dir.path(), "bad.json", "{ not json"),
        write(dir.path(), "bad.firep", "firep 1\n2\n1\n0\n"),
        write(dir.path(), "missing_field.json", r#"{"n": 1, "generators": [["0"]]}"#),
    ] {
        let out = run(&[
            "hn",
            "--module",
            bad.to_str().unwrap(),
            "--stab",
            stab.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2), "{}", stderr_text(&out));
    }
}

#[test]
fn invalid_stability_exits_with_the_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", INTERVAL);
    let stab = write(
        dir.path(),
        "z.json",
        r#"{
            "mode": "eval",
            "alpha": [{"point": ["0"], "coeff": "-1"}],
            "beta": {"window": [["0", "1"]], "values": ["1"], "tails": [["1/2", "1/2"]]}
        }"#,
    );
    let out = run(&[
        "s",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--x=0",
        "--y=0",
        "--theta=1",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr_text(&out));
    assert!(stderr_text(&out).contains("negative weight"));
}

#[test]
fn reports_write_to_the_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let module = write(dir.path(), "m.json", INTERVAL);
    let stab = write(dir.path(), "z.json", SKY0);
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "hn",
        "--module",
        module.to_str().unwrap(),
        "--stab",
        stab.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_text(&out));
    assert!(out.stdout.is_empty());
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["slopes"], serde_json::json!(["1"]));
}

#[test]
fn harness_quick_passes_with_the_default_seed() {
    let out = run(&["harness", "--quick"]);
    let report = stdout_json(&out);
    assert_eq!(report["passed"], true);
    assert_eq!(report["quick"], true);
    assert_eq!(report["seed"], 42);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 10);
    assert!(checks.iter().all(|c| c["passed"] == true));
    let progress = stderr_text(&out);
    assert!(progress.contains("check 1 (oracle-equivalence): PASS"));
    assert!(progress.contains("check 10 (validation-guardrails): PASS"));
}

#[test]
fn an_injected_sign_flip_is_caught_and_named() {
    let out = run(&[
        "harness",
        "--quick",
        "--check",
        "1",
        "--mutate",
        "slope-sign",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr_text(&out));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(report["checks"][0]["name"], "oracle-equivalence");
    let detail = report["checks"][0]["detail"].as_str().unwrap();
    assert!(detail.contains("disagrees"), "detail: {detail}");
}
