use std::process::{Command, Output};

use serde_json::Value;

fn wld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wld")).args(args).env_remove("WLD_THREADS").output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = wld(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv_text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(csv_text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn header(csv_text: &str) -> Vec<String> {
    csv::Reader::from_reader(csv_text.as_bytes()).headers().unwrap().iter().map(str::to_string).collect()
}

#[test]
fn b_table_rows() {
    let one = stdout(&["b-table", "--r-max", "1"]);
    assert_eq!(header(&one), ["r", "j", "numerator", "denominator"]);
    assert_eq!(rows(&one), vec![vec!["1", "0", "2", "1"]]);
    let four = rows(&stdout(&["b-table", "--r-max", "4"]));
    assert!(four.contains(&vec!["4".into(), "0".into(), "64".into(), "45".into()]));
    assert!(four.contains(&vec!["3".into(), "3".into(), "-8".into(), "1".into()]));
    assert_eq!(four.len(), 1 + 3 + 5 + 7);
}

#[test]
fn b_table_guards() {
    assert_eq!(wld(&["b-table", "--r-max", "9"]).status.code(), Some(2));
    assert_eq!(wld(&["b-table", "--r-max", "0"]).status.code(), Some(2));
}

#[test]
fn density_curve_values() {
    let t = stdout(&["density-curve", "--family", "theoremA", "--r", "1", "--x-min", "0.5", "--x-max", "0.5", "--npoints", "1"]);
    assert_eq!(header(&t), ["x", "W_theoremA"]);
    let r = rows(&t);
    assert_eq!(r.len(), 1);
    assert!((r[0][1].parse::<f64>().unwrap() - 1.0).abs() < 1e-15);

    let all = stdout(&["density-curve", "--r", "1", "--npoints", "11"]);
    assert_eq!(header(&all), ["x", "W_theoremA", "W_conjectureD", "W_Sp", "W_SOeven", "W_U"]);
    for row in rows(&all) {
        let a: f64 = row[1].parse().unwrap();
        let so: f64 = row[4].parse().unwrap();
        assert!((a - so).abs() < 1e-12);
    }
    // No theorem kernel at r = 4, so that column stays empty.
    let r4 = rows(&stdout(&["density-curve", "--r", "4", "--npoints", "3"]));
    assert!(r4.iter().all(|row| row[1].is_empty() && !row[2].is_empty()));
    assert_eq!(wld(&["density-curve", "--family", "theoremA", "--r", "4"]).status.code(), Some(2));
}

#[test]
fn measure_outputs() {
    let m = stdout(&["measure-moments", "--p", "3", "--r", "2", "--ell-max", "4"]);
    assert_eq!(header(&m), ["p", "r", "harmonic", "ell", "moment_quadrature", "moment_closed", "abs_diff"]);
    for row in rows(&m) {
        assert!(row[6].parse::<f64>().unwrap() < 1e-10);
    }
    let d = rows(&stdout(&["measure-density", "--p", "5", "--r", "3", "--unweighted", "--npoints", "9"]));
    assert_eq!(d.len(), 9);
    assert!(d.iter().all(|row| row[1].parse::<f64>().unwrap() > 0.0));
    assert_eq!(wld(&["measure-density", "--p", "1", "--r", "1"]).status.code(), Some(2));
}

#[test]
fn json_commands() {
    let v: Value = serde_json::from_str(&stdout(&["rmt-sim", "--N", "4", "--samples", "500", "--r", "1", "--seed", "3"])).unwrap();
    for k in ["estimate", "std_error", "reference", "z_score", "effective_samples"] {
        assert!(v[k].is_number(), "{k}");
    }
    assert_eq!(v["config"]["N"], 4);
    let l: Value = serde_json::from_str(&stdout(&["lemma41", "--n", "2", "--R", "1e8", "--limit", "100000"])).unwrap();
    assert!(l["rel_error"].as_f64().unwrap() < 0.5);
    assert_eq!(wld(&["lemma41", "--R", "1e14", "--limit", "1000"]).status.code(), Some(2));
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, threads) in [(&a, "1"), (&b, "2")] {
        let args = ["--threads", threads, "--out", path.to_str().unwrap(), "rmt-sim", "--N", "5", "--samples", "300"];
        assert!(wld(&args).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c1 = stdout(&["density-curve", "--r", "3"]);
    assert_eq!(c1, stdout(&["density-curve", "--r", "3"]));
    assert!(!c1.contains('\r'));
}

#[test]
fn thread_settings() {
    assert_eq!(wld(&["--threads", "0", "b-table"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_wld")).args(["b-table"]).env("WLD_THREADS", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fast_verify_reports_every_check() {
    let out = wld(&["verify", "--level", "fast"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| !c["passed"].as_bool().unwrap())
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(out.status.success(), failed.is_empty());
    assert_eq!(v["passed"].as_bool().unwrap(), failed.is_empty());
    // The n = 1 prime sum sits near 0.146 at R = 1e14: the second-order term
    // −E/log R with E ≈ 1.33 (from Σ log p/p = log x − E) is still large there.
    assert_eq!(failed, ["prime sum n=1"]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("FAILED: prime sum n=1"));
}

fn validate(schema_file: &str, doc: &Value) {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(schema_file);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_file}: {errors:?}");
}

#[test]
fn json_outputs_match_the_shipped_schemas() {
    let rmt: Value = serde_json::from_str(&stdout(&["rmt-sim", "--N", "3", "--samples", "50", "--r", "2"])).unwrap();
    validate("rmt-sim.schema.json", &rmt);
    let l41: Value = serde_json::from_str(&stdout(&["lemma41", "--R", "1e6", "--limit", "10000"])).unwrap();
    validate("lemma41.schema.json", &l41);
    let report: Value = serde_json::from_slice(&wld(&["verify"]).stdout).unwrap();
    validate("verify-report.schema.json", &report);
    let mut broken = rmt.clone();
    broken.as_object_mut().unwrap().remove("estimate");
    let schema: Value = serde_json::from_str(
        &std::fs::read_to_string(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas/rmt-sim.schema.json")).unwrap(),
    )
    .unwrap();
    assert!(!jsonschema::is_valid(&schema, &broken));
}
