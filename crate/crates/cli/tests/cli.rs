use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn dyadic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadic")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["frobnicate"][..],
        &["certify", "--p", "7/8", "--k", "1", "--unknown"],
        &["simulate", "--n", "2"],
        &["poly"],
        &["certify", "--p", "7/8", "--q", "1/8"],
        &["bounds", "iterate", "--map", "dim3", "--start", "0.1"],
    ] {
        assert_eq!(dyadic(args).status.code(), Some(1), "{args:?}");
    }
    // well-formed but invalid values
    assert_eq!(dyadic(&["certify", "--p", "3/2", "--k", "1"]).status.code(), Some(1));
    assert_eq!(dyadic(&["poly", "--exact-T", "3"]).status.code(), Some(1));
    assert_eq!(dyadic(&["enum", "chain-trees", "--n", "4"]).status.code(), Some(1));
    assert_eq!(dyadic(&["--help"]).status.code(), Some(0));
}

#[test]
fn failed_certificates_exit_two() {
    let out = dyadic(&["certify", "--p", "6/7", "--k", "15"]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json(&out);
    assert_eq!(doc["status"], "not-established");
    assert!(doc["reason"].as_str().unwrap().contains("a_k"));

    let out = dyadic(&["certify", "--q", "1/8", "--optimal", "--k", "7", "--x", "0.65"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dyadic(&["certify", "--q", "1/8", "--optimal", "--k", "7", "--x", "0.66"]);
    assert_eq!(out.status.code(), Some(0));
    // the first simple certificate at 6/7 has X above the target
    let out = dyadic(&["certify", "--p", "6/7", "--target", "1/2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn transcripts_verify_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    for (name, args) in [
        ("rational", &["certify", "--p", "7/8", "--optimal", "--target", "0.655"][..]),
        ("interval", &["certify", "--p", "6/7", "--k", "16", "--backend", "interval"]),
    ] {
        let path = dir.path().join(format!("{name}.json"));
        let path = path.to_str().unwrap();
        let mut full = args.to_vec();
        full.extend(["--transcript", path]);
        let out = dyadic(&full);
        assert!(out.status.success(), "{name}");
        assert_eq!(fs::read(path).unwrap(), out.stdout);

        let check = dyadic(&["certify", "--verify", path]);
        assert!(check.status.success(), "{name}");
        assert_eq!(json(&check)["status"], "valid");

        let mut doc = json(&out);
        doc["X"] = "1/2".into();
        let forged = dir.path().join(format!("{name}-forged.json"));
        fs::write(&forged, doc.to_string()).unwrap();
        for extra in [&[][..], &["--no-recompute"]] {
            let mut args = vec!["certify", "--verify", forged.to_str().unwrap()];
            args.extend(extra);
            let check = dyadic(&args);
            assert_eq!(check.status.code(), Some(2), "{name} {extra:?}");
            assert_eq!(json(&check)["status"], "invalid");
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        &["simulate", "--n", "1,3", "--grid", "0.5:0.9:0.2", "--trials", "500", "--seed", "9"][..],
        &["simulate", "--n", "2", "--p", "3/4", "--trials", "300", "--out", "json"],
        &["simulate", "--n", "5", "--p", "0.7", "--seed", "2", "--sample"],
        &["certify", "--p", "0.8560310279", "--k", "1000", "--backend", "interval"],
        &["bounds", "threshold"],
        &["enum", "successors", "--b", "3", "--list"],
    ] {
        let (a, b) = (dyadic(args), dyadic(args));
        assert!(!a.stdout.is_empty(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    // thread count does not change results
    let args = ["simulate", "--n", "4", "--p", "0.7", "--trials", "2000", "--seed", "1"];
    let one = dyadic(&[&["--threads", "1"][..], &args].concat());
    let three = dyadic(&[&["--threads", "3"][..], &args].concat());
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn manifest_is_written_to_stderr() {
    let out = dyadic(&["simulate", "--n", "2", "--p", "0.5", "--trials", "100", "--seed", "42"]);
    let last = String::from_utf8(out.stderr).unwrap();
    let doc: Value = serde_json::from_str(last.lines().last().unwrap()).unwrap();
    let m = &doc["manifest"];
    assert_eq!(m["subcommand"], "simulate");
    assert_eq!(m["seed"], 42);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["args"][0], "simulate");
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn decide_reads_both_forms_and_prints_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("full.txt");
    // every order-2 tile available
    fs::write(&text, "2\nff0f\n").unwrap();
    let out = dyadic(&["decide", "--config", text.to_str().unwrap(), "--witness"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("tileable"));
    let witness: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(witness["tiling"]["tiles"].as_array().unwrap().len(), 4);

    let sample = dyadic(&["simulate", "--n", "6", "--p", "0.5", "--seed", "3", "--sample", "--out", "json"]);
    let cfg = dir.path().join("sample.json");
    fs::write(&cfg, &sample.stdout).unwrap();
    let out = dyadic(&["decide", "--config", cfg.to_str().unwrap(), "--witness"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("blocked"));
    let witness: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(witness["principal_chain_tree"]["depth"], 6);
    assert_eq!(witness["verification"]["disjoint"], true);
    assert_eq!(witness["verification"]["violations"].as_array().unwrap().len(), 0);

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2\nzz\n").unwrap();
    assert_eq!(dyadic(&["decide", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn poly_and_enum_outputs() {
    let out = dyadic(&["poly", "--f", "2"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "16q^2z+16q^2z^2");
    let doc = json(&dyadic(&["poly", "--exact-T", "1", "--out", "json"]));
    assert_eq!(doc["coefficients"], serde_json::json!(["0", "0", "2", "0", "-1"]));
    let doc = json(&dyadic(&["enum", "chain-trees", "--n", "2"]));
    assert_eq!(doc["count"], 32);
    assert_eq!(doc["f_n(1,1)"], "32");
    let doc = json(&dyadic(&["enum", "tilings", "--n", "3"]));
    assert_eq!(doc["count"], "82");
    let doc = json(&dyadic(&["enum", "successors", "--order", "1", "--core", "1,1,0,0"]));
    assert_eq!(doc["by_splits"], serde_json::json!([4, 4]));
    let doc = json(&dyadic(&["bounds", "iterate", "--map", "fkg", "--start", "0.62", "--steps", "4"]));
    assert_eq!(doc["verdict"], "stays-above");
    let doc = json(&dyadic(&["bounds", "bad-square", "--n", "1", "--p", "1/2"]));
    assert_eq!(doc["bad_square_prob"]["exact"], "9/16");
}
