use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypocert::zoo;

fn hypocert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypocert")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"))
}

fn scratch(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn zoo_list_names_six_models() {
    let o = hypocert(&["zoo", "list"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    assert_eq!(names, zoo::NAMES);
}

#[test]
fn zoo_emit_matches_golden_files() {
    for name in zoo::NAMES {
        let o = hypocert(&["zoo", "emit", name]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let expected = std::fs::read_to_string(golden(name)).unwrap();
        assert_eq!(stdout(&o), expected, "{name}");
    }
}

#[test]
fn emit_parse_emit_is_byte_identical() {
    for name in zoo::NAMES {
        let path = scratch(&format!("roundtrip-{name}.json"));
        let first = hypocert(&["zoo", "emit", name, "-o", path.to_str().unwrap()]);
        assert!(first.status.success());
        let text = std::fs::read_to_string(&path).unwrap();
        let again = hypocert::sysfile::SystemFile::from_json(&text).unwrap().to_json();
        assert_eq!(again, text, "{name}");
    }
}

#[test]
fn kalman_reports_and_exit_codes() {
    let o = hypocert(&["kalman", "zoo:sugimoto"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("K = 2"), "{text}");
    let o = hypocert(&["kalman", "zoo:damped-wave", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["order"].as_u64(), v["alpha"].as_u64(), v["beta"].as_u64()), (Some(1), Some(0), Some(1)));

    let o = hypocert(&["kalman", "zoo:sugimoto", "--kmax", "1"]);
    assert_eq!(o.status.code(), Some(1), "condition fails at K = 1");
}

#[test]
fn input_errors_exit_with_two() {
    let bad = scratch("asymmetric.json");
    std::fs::write(
        &bad,
        r#"{"name": "bad", "n": 2, "A": [["0", "1"], ["3", "0"]], "Ba": [["0", "0"], ["0", "0"]], "Bs": [["1", "0"], ["0", "0"]]}"#,
    )
    .unwrap();
    let o = hypocert(&["kalman", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("A[0][1]"), "{}", stderr(&o));

    let garbled = scratch("garbled.json");
    std::fs::write(&garbled, "{\n  \"name\": \"g\",\n  \"n\": 2,\n  oops\n}\n").unwrap();
    let o = hypocert(&["analyze", garbled.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    for args in [
        vec!["analyze", "zoo:nope"],
        vec!["analyze", "zoo:toy2x2", "--param", "c=1"],
        vec!["analyze", "zoo:toy2x2", "--param", "a"],
        vec!["kalman", "/nonexistent/system.json"],
        vec!["zoo", "emit", "nope"],
    ] {
        assert_eq!(hypocert(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn uncontrolled_system_is_not_analyzed() {
    let f = scratch("uncontrolled.json");
    std::fs::write(
        &f,
        r#"{"name": "u", "n": 2, "A": [["1", "0"], ["0", "2"]], "Ba": [["0", "0"], ["0", "0"]], "Bs": [["1", "0"], ["0", "0"]]}"#,
    )
    .unwrap();
    assert_eq!(hypocert(&["kalman", f.to_str().unwrap()]).status.code(), Some(1));
    let o = hypocert(&["analyze", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).to_lowercase().contains("kalman"), "{}", stderr(&o));
}

#[test]
fn analyze_prints_cancellation_conditions() {
    let o = hypocert(&["analyze", "zoo:timoshenko", "--param", "a=1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("a^2 = 1 holds (equal wave speed)"), "{text}");

    let o = hypocert(&["analyze", "zoo:timoshenko-memory", "--param", "c1=3/5", "--param", "c2=4/5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["high"]["certificate"]["exponent"], 0);
    assert!(v["cancellation_notes"][0].as_str().unwrap().contains("c1^2 + c2^2 = 1"));

    let o = hypocert(&["analyze", "zoo:toy3x3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["high"]["certificate"]["exponent"], 1);
    assert_eq!(v["low"]["certificate"]["exponent"], 2);
    assert_eq!(v["low"]["certificate"]["provenance"], "KalmanGeneric");
    assert_eq!(v["verdict"], "CERTIFIED-WITH-FALLBACK");
}

#[test]
fn analyze_output_is_deterministic() {
    for name in ["toy3x3", "timoshenko"] {
        let src = format!("zoo:{name}");
        let a = hypocert(&["analyze", &src, "--format", "json"]);
        let b = hypocert(&["analyze", &src, "--format", "json"]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{name}");
        let from_file = hypocert(&["analyze", golden(name).to_str().unwrap(), "--format", "json"]);
        assert_eq!(a.stdout, from_file.stdout, "{name}: zoo and golden file disagree");
    }
}

#[test]
fn verify_certifies_toy2x2_on_both_sides_of_the_dichotomy() {
    for (params, alpha) in [(["--param", "a=1", "--param", "b=1"], 0), (["--param", "a=1", "--param", "b=2"], 1)] {
        let csv = scratch(&format!("toy2x2-{alpha}.csv"));
        let mut args = vec!["verify", "zoo:toy2x2", "--format", "json", "--csv", csv.to_str().unwrap()];
        args.extend(params);
        let o = hypocert(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["verdict"], "CERTIFIED");
        let hf = &v["verification"]["exponents"][0];
        assert_eq!(hf["certified"], alpha);
        assert_eq!(hf["spectral"]["exponent"], alpha);
        assert_eq!(hf["sharp"], true);
        let table = std::fs::read_to_string(&csv).unwrap();
        let mut lines = table.lines();
        assert_eq!(lines.next(), Some("regime,xi,smin,spectral_rate,fitted_rate,lyap_margin"));
        assert_eq!(lines.count(), 20);
    }
}

#[test]
fn verify_sugimoto_reports_beta_table() {
    let o = hypocert(&["verify", "zoo:sugimoto", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("CERTIFIED"), "{text}");
    assert!(!text.contains("FAILED"), "{text}");
}

#[test]
fn sweep_flags_are_validated() {
    let o = hypocert(&["verify", "zoo:damped-wave", "--xi-min-exp", "9", "--xi-max-exp", "3"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = hypocert(&["analyze", "zoo:damped-wave", "--eps-max", "6", "--eps-min", "4"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
