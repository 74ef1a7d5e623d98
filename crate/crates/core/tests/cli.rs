use std::process::{Command, Output};

use serde_json::Value;

fn digitsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_digitsum"))
        .args(args)
        .env_remove("DIGITSUM_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = digitsum(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn schema() -> jsonschema::JSONSchema {
    let text = include_str!("../schema/report.schema.json");
    let doc: Value = serde_json::from_str(text).unwrap();
    jsonschema::JSONSchema::compile(&doc).expect("schema compiles")
}

fn assert_valid(schema: &jsonschema::JSONSchema, doc: &Value) {
    if let Err(errors) = schema.validate(doc) {
        let msgs: Vec<String> = errors
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect();
        panic!("schema violations for {}: {msgs:?}", doc["command"]);
    }
}

#[test]
fn every_command_validates_against_schema() {
    let schema = schema();
    let runs: &[&[&str]] = &[
        &["exponents"],
        &["exponents", "--a", "3", "--b", "5", "--tau", "0.4"],
        &["exponents", "--tau", "1.2618595071429148"],
        &[
            "sample", "--tau", "1", "--k", "300", "--count", "4", "--seed", "9",
        ],
        &["scan", "--max", "1e4", "--eps", "0", "--eps", "0.02"],
        &["weyl", "--k", "300", "--H", "5"],
        &["weyl", "--m", "98765432123456789", "--H", "3"],
        &["cf", "--terms", "12"],
        &["discrepancy", "--n", "2000"],
        &["verify", "--fast"],
    ];
    for args in runs {
        assert_valid(&schema, &json(args));
    }
    let mut broken = json(&["cf", "--terms", "3"]);
    broken["rows"][0]["q_i"] = Value::from(1.5);
    assert!(!schema.is_valid(&broken));
    broken = json(&["sample", "--tau", "1", "--k", "20", "--count", "1"]);
    broken.as_object_mut().unwrap().remove("strategy");
    assert!(!schema.is_valid(&broken));
    broken["schema_version"] = Value::from(2);
    assert!(!schema.is_valid(&broken));

    let err = digitsum(&["weyl", "--m", "12x"]);
    assert_eq!(err.status.code(), Some(2));
    assert_valid(&schema, &serde_json::from_slice(&err.stdout).unwrap());
}

#[test]
fn exit_codes() {
    let usage: &[&[&str]] = &[
        &["sample", "--a", "2", "--b", "3"],
        &["exponents", "--bogus"],
        &["exponents", "--a", "65"],
        &["scan", "--max", "0"],
        &["scan", "--max", "1.5"],
        &["cf", "--terms", "0"],
        &["nonsense"],
        &[],
    ];
    for args in usage {
        let out = digitsum(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let stderr = String::from_utf8(out.stderr).unwrap();
        assert_eq!(stderr.lines().count(), 1, "{args:?}: {stderr}");
        assert!(stderr.starts_with("digitsum: "));
    }
    assert_eq!(digitsum(&["--help"]).status.code(), Some(0));
    assert_eq!(digitsum(&["--version"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/out.json");
    let out = digitsum(&["cf", "--output", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);

    let junk = dir.path().join("junk.ckpt");
    std::fs::write(&junk, b"not a checkpoint").unwrap();
    let out = digitsum(&[
        "scan",
        "--max",
        "1000",
        "--checkpoint",
        junk.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn output_is_deterministic() {
    for format in ["json", "csv", "text"] {
        for args in [
            vec![
                "sample", "--tau", "0.7", "--k", "400", "--count", "5", "--seed", "17",
            ],
            vec!["weyl", "--k", "200", "--seed", "5"],
            vec!["scan", "--max", "50000", "--eps", "0.1"],
        ] {
            let mut args = args.clone();
            args.extend(["--format", format]);
            let first = digitsum(&args);
            let second = digitsum(&args);
            assert!(first.status.success());
            assert_eq!(first.stdout, second.stdout, "{args:?}");
        }
    }
}

#[test]
fn scan_threads_do_not_change_output() {
    let one = digitsum(&[
        "scan",
        "--max",
        "200000",
        "--threads",
        "1",
        "--format",
        "csv",
    ]);
    let many = digitsum(&[
        "scan",
        "--max",
        "200000",
        "--threads",
        "7",
        "--format",
        "csv",
    ]);
    assert_eq!(one.stdout, many.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_digitsum"))
        .args(["scan", "--max", "200000", "--format", "csv"])
        .env("DIGITSUM_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(one.stdout, env.stdout);
}

#[test]
fn scan_resume_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("scan.ckpt");
    let args = [
        "scan", "--max", "300000", "--eps", "0.05", "--format", "csv",
    ];
    let plain = digitsum(&args);
    let mut partial = digitsum::scan::ScanState::new(2, 3, 300_000).unwrap();
    partial.advance_to(54_321, Default::default()).unwrap();
    partial.save(&ck).unwrap();
    let mut with_ck = args.to_vec();
    with_ck.extend(["--checkpoint", ck.to_str().unwrap()]);
    let resumed = digitsum(&with_ck);
    assert!(resumed.status.success());
    assert_eq!(plain.stdout, resumed.stdout);
    // a finished checkpoint replays the same report
    assert_eq!(plain.stdout, digitsum(&with_ck).stdout);
}

#[test]
fn scan_matches_naive_count() {
    let doc = json(&[
        "scan", "--a", "2", "--b", "3", "--max", "1000000", "--tau", "1", "--eps", "0",
    ]);
    let last = doc["rows"].as_array().unwrap().last().unwrap();
    let naive = digitsum::scan::naive_coincidences(2, 3, 1_000_000).unwrap();
    assert_eq!(last["x"], 1_000_000);
    assert_eq!(last["count_eq"], naive);
    assert_eq!(last["count_eps"]["0"], naive);
}

#[test]
fn csv_shapes() {
    let out = digitsum(&[
        "sample", "--tau", "1", "--k", "100", "--count", "13", "--format", "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("i,s_a,s_b,ratio"));
    assert_eq!(text.lines().count(), 14);

    let out = digitsum(&["cf", "--terms", "15", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("i,a_i,p_i,q_i,err_lo,err_hi,lambda_eff")
    );
    assert_eq!(text.lines().count(), 16);
    // floats carry 17 significant digits and parse back
    let row: Vec<&str> = text.lines().nth(10).unwrap().split(',').collect();
    let mantissa = row[5].split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
    assert!(row[5].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn exponents_json_round_trips() {
    let out = digitsum(&[
        "exponents",
        "--a",
        "2",
        "--b",
        "3",
        "--tau",
        "1",
        "--format",
        "json",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert!((doc["tau0"].as_f64().unwrap() - 1.26186).abs() <= 1e-5);
    assert!((doc["c0"].as_f64().unwrap() - 0.94996).abs() <= 5e-5);
    let again = serde_json::to_string_pretty(&doc).unwrap() + "\n";
    assert_eq!(text, again);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cf.csv");
    let out = digitsum(&[
        "cf",
        "--terms",
        "9",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let direct = digitsum(&["cf", "--terms", "9", "--format", "csv"]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}
