use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lkfit(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lkfit"))
        .args(args)
        .env("LKFIT_OUTPUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) {
    let o = lkfit(out, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema: &str, doc: &Path) {
    let schema = read_json(&schema_path(schema));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let instance = read_json(doc);
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", doc.display());
}

#[test]
fn simulate_pilot_fit_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(out, &["simulate", "--n", "400", "--seed", "5"]);
    let input = out.join("increments.csv");
    let text = std::fs::read_to_string(&input).unwrap();
    assert_eq!(text.lines().count(), 401);
    assert_eq!(text.lines().next(), Some("increment"));

    let input = input.to_str().unwrap();
    ok(out, &["pilot", "--input", input, "--u-max", "10", "--step", "0.1"]);
    assert_valid("pilot.schema.json", &out.join("pilot.json"));
    let pilot = read_json(&out.join("pilot.json"));
    assert_eq!(pilot["nu_tilde"]["atom_mass"], 0.0);

    let pilot_path = out.join("pilot.json");
    ok(
        out,
        &[
            "fit",
            "--input",
            input,
            "--pilot",
            pilot_path.to_str().unwrap(),
            "--u-max",
            "10",
            "--step",
            "0.1",
            "--thresholds",
            "1,2",
        ],
    );
    assert_valid("fit.schema.json", &out.join("fit.json"));
    let fit = read_json(&out.join("fit.json"));
    assert_eq!(fit["jump_tails"].as_array().unwrap().len(), 2);
    assert!(fit["objective"].as_f64().unwrap() <= fit["pilot_objective"].as_f64().unwrap());
    for csv in ["fit_cf.csv", "fit_density.csv", "pilot_fnu.csv"] {
        assert!(out.join(csv).exists(), "{csv}");
    }
}

#[test]
fn example_is_reproducible_and_valid() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["example", "--n", "300", "--replications", "2", "--seed", "4"];
    ok(a.path(), &args);
    ok(b.path(), &args);
    for f in ["example_rows.csv", "example_cf.csv", "example_density.csv", "example_histogram.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
    assert_valid("example_report.schema.json", &a.path().join("example_report.json"));
}

#[test]
fn t41_check_and_rates_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(
        out,
        &[
            "t41-check",
            "--model",
            "pure-gaussian",
            "--n-values",
            "50,200",
            "--replications",
            "5",
            "--u-max",
            "5",
            "--step",
            "0.25",
        ],
    );
    assert_valid("t41.schema.json", &out.join("t41_pure_gaussian.json"));

    ok(
        out,
        &[
            "rates",
            "--model",
            "compound-poisson",
            "--n-values",
            "200,400",
            "--replications",
            "2",
            "--s-values",
            "0,1",
            "--loss-u-max",
            "20",
        ],
    );
    let json = out.join("rates_compound_poisson_gaussian_jumps.json");
    assert_valid("rates.schema.json", &json);
    let table = read_json(&json);
    assert_eq!(table["decay_case"], "polynomial");
    assert_eq!(table["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn failures_exit_nonzero_with_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = lkfit(dir.path(), &["fit", "--input", missing.to_str().unwrap()]);
    assert!(!o.status.success());
    let err: Value = serde_json::from_slice(o.stderr.trim_ascii()).expect("stderr is JSON");
    assert_eq!(err["error"], "csv");
    assert!(err["message"].as_str().unwrap().contains("missing.csv"));

    let o = lkfit(
        dir.path(),
        &["simulate", "--model-json", r#"{"kind":"pure_gaussian","b":0,"sigma":-1}"#],
    );
    assert!(!o.status.success());
    let err: Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "invalid_parameter");
}

#[test]
fn model_json_overrides_model_flag() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["simulate", "--n", "5", "--model-json", r#"{"kind":"pure_gaussian","b":3,"sigma":0}"#],
    );
    let text = std::fs::read_to_string(dir.path().join("increments.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l == "3.0"), "{text}");
    let model = read_json(&dir.path().join("model.json"));
    assert_eq!(model["kind"], "pure_gaussian");
}
