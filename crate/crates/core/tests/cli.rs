use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn qslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qslab"))
        .args(args)
        .current_dir(root())
        .env_remove("QSLAB_SEED")
        .output()
        .expect("spawn qslab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("stdout not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn schema(name: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(root().join("schemas").join(name)).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, v: &Value) {
    let errors: Vec<String> = schema(schema_name).iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
}

fn report_schema(experiment: &str) -> &'static str {
    match experiment {
        "certify" | "altreality" => "certificate.schema.json",
        "timetravel" => "timetravel.schema.json",
        "altlaws" => "altlaws.schema.json",
        "ergodicity" => "ergodicity.schema.json",
        "spacegraph" => "spacegraph.schema.json",
        "decohere" => "decoherence.schema.json",
        "coherent" => "coherent.schema.json",
        "factorfamily" => "factorfamily.schema.json",
        other => panic!("no schema for {other}"),
    }
}

fn assert_report_valid(v: &Value) {
    assert_valid("run-report.schema.json", v);
    assert_valid(report_schema(v["experiment"].as_str().unwrap()), &v["report"]);
}

#[test]
fn certify_time_witness_exits_zero() {
    let o = qslab(&["certify", "--model", "models/ising3.json", "--witness", "time:1.0", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "DistinctStructures");
    assert!(v["report"]["gap"].as_f64().unwrap() > 1e-3);
    assert!(v["report"].get("witness").is_none());
    assert_report_valid(&v);
}

#[test]
fn phase_witness_is_a_mismatch_under_default_expectation() {
    let o = qslab(&["certify", "--model", "models/ising3.json", "--witness", "phase:0.3"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout_json(&o)["verdict"], "EquivalentUnderGP");
    let o = qslab(&["certify", "--model", "models/ising3.json", "--witness", "phase:0.3", "--expect", "EquivalentUnderGP"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn ergodicity_of_equally_spaced_levels() {
    let o = qslab(&["ergodicity", "--model", "models/diag012.json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "NotErgodicRationalRelation");
    assert_report_valid(&v);
}

#[test]
fn full_flag_adds_witness_matrix() {
    let o = qslab(&["certify", "--model", "models/diag012.json", "--witness", "time:0.5", "--full"]);
    let v = stdout_json(&o);
    let w = v["report"]["witness"].as_array().unwrap();
    assert_eq!(w.len(), 3);
    assert_report_valid(&v);
}

#[test]
fn errors_have_distinct_diagnostics_and_exit_one() {
    let missing = qslab(&["certify", "--model", "models/nope.json", "--witness", "time:1"]);
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("i/o error"), "{}", stderr(&missing));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"model": "ising", "params": {"n": 3}}"#).unwrap();
    let schema_err = qslab(&["certify", "--model", bad.to_str().unwrap(), "--witness", "time:1"]);
    assert_eq!(code(&schema_err), 1);
    assert!(stderr(&schema_err).contains("schema violation"), "{}", stderr(&schema_err));

    let big = dir.path().join("big.json");
    std::fs::write(&big, r#"{"model": "diagonal", "params": {"eigenvalues": [0,1,2,3,4,5,6,7,8]}}"#).unwrap();
    let capacity = qslab(&["ergodicity", "--model", big.to_str().unwrap()]);
    assert_eq!(code(&capacity), 1);
    assert!(stderr(&capacity).contains("capacity error"), "{}", stderr(&capacity));

    let arg = qslab(&["certify", "--model", "models/ising3.json", "--witness", "warp:1"]);
    assert_eq!(code(&arg), 1);
    assert!(stderr(&arg).contains("argument error"), "{}", stderr(&arg));

    let diagnostics = [&missing, &schema_err, &capacity, &arg].map(stderr);
    for i in 0..diagnostics.len() {
        for j in (i + 1)..diagnostics.len() {
            assert_ne!(diagnostics[i], diagnostics[j]);
        }
    }
}

#[test]
fn seed_env_var_sets_default_and_flag_overrides() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qslab"));
        cmd.current_dir(root()).args(["certify", "--model", "models/ising3.json", "--witness", "time:1.0"]);
        cmd.env_remove("QSLAB_SEED");
        if let Some(e) = env {
            cmd.env("QSLAB_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        cmd.output().unwrap().stdout
    };
    let by_env = run(Some("9"), None);
    assert_eq!(by_env, run(None, Some("9")));
    assert_eq!(run(Some("3"), Some("9")), by_env);
    assert_ne!(run(None, None), by_env);
}

#[test]
fn every_subcommand_emits_schema_valid_json() {
    let cases: &[&[&str]] = &[
        &["timetravel", "--model", "models/nrqm2x3.json", "--t", "0.7", "--samples", "3"],
        &["altreality", "--model", "models/ising3.json", "--seed", "2"],
        &["altlaws", "--model", "models/ising3.json", "--samples", "5"],
        &["spacegraph", "--model", "models/ising4.json"],
        &["decohere", "--model", "models/zurek2.json", "--times", "20"],
        &["coherent", "--sites", "8"],
        &["coherent", "--model", "models/ising3.json"],
        &["factorfamily", "--model", "models/diag4.json", "--count", "4"],
        &["ergodicity", "--model", "models/diag01sqrt2.json", "--bound", "10", "--tol", "1e-6"],
    ];
    for args in cases {
        let o = qslab(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        assert_report_valid(&stdout_json(&o));
    }
    let o = qslab(&["model", "--model", "models/nrqm2x3.json"]);
    assert_eq!(code(&o), 0);
    assert_valid("model-description.schema.json", &stdout_json(&o));
}

#[test]
fn artifacts_are_written_per_format() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g");
    let o = qslab(&["spacegraph", "--model", "models/ising3.json", "--out", prefix.to_str().unwrap(), "--format", "json,dot"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let dot = std::fs::read_to_string(dir.path().join("g.dot")).unwrap();
    assert!(dot.starts_with("graph"));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_report_valid(&json);

    let trace = dir.path().join("z");
    let o = qslab(&["decohere", "--model", "models/zurek1.json", "--out", trace.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,offdiag,oracle"));
    assert_eq!(csv.lines().count(), 201);

    let o = qslab(&["certify", "--model", "models/ising3.json", "--witness", "time:1", "--out", prefix.to_str().unwrap(), "--format", "dot"]);
    assert_eq!(code(&o), 1);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().filter_map(|e| e.ok()).filter(|e| e.file_name().to_string_lossy().contains(".tmp")).collect();
    assert!(leftovers.is_empty());
}

#[test]
fn shipped_inputs_validate() {
    for entry in std::fs::read_dir(root().join("models")).unwrap() {
        let path = entry.unwrap().path();
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_valid("model-spec.schema.json", &v);
        assert!(qslab::models::ModelSpec::from_json(&v.to_string()).unwrap().build().is_ok(), "{}", path.display());
    }
    for name in ["paper-demos.json", "controls.json"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(root().join("bundles").join(name)).unwrap()).unwrap();
        assert_valid("bundle.schema.json", &v);
        for r in v["runs"].as_array().unwrap() {
            assert_valid("run-config.schema.json", r);
        }
    }
}

#[test]
fn schema_and_library_agree_on_required_params() {
    let validator = schema("run-config.schema.json");
    let cases = [
        (r#"{"experiment": "certify", "model_file": "m.json"}"#, false),
        (r#"{"experiment": "certify", "model_file": "m.json", "params": {"witness": "time:1"}}"#, true),
        (r#"{"experiment": "timetravel", "model_file": "m.json"}"#, false),
        (r#"{"experiment": "coherent"}"#, true),
        (r#"{"experiment": "spacegraph"}"#, false),
        (r#"{"experiment": "spacegraph", "model_file": "m.json", "extra": 1}"#, false),
    ];
    for (text, ok) in cases {
        let v: Value = serde_json::from_str(text).unwrap();
        assert_eq!(validator.is_valid(&v), ok, "{text}");
        assert_eq!(qslab::experiments::RunConfig::from_json(text).is_ok(), ok, "{text}");
    }
}

#[test]
fn run_subcommand_resolves_model_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(root().join("models/diag012.json"), dir.path().join("m.json")).unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": "ergodicity", "model_file": "m.json"}"#).unwrap();
    let o = qslab(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout_json(&o)["verdict"], "NotErgodicRationalRelation");
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn strip_timestamp(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn bundle_outputs_validate_and_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let bundle = root().join("bundles/paper-demos.json");
    let oa = qslab(&["bundle", bundle.to_str().unwrap(), "--jobs", "4", "--out", a.path().to_str().unwrap()]);
    let ob = qslab(&["bundle", bundle.to_str().unwrap(), "--jobs", "1", "--out", b.path().to_str().unwrap()]);
    assert_eq!(code(&oa), 0, "{}", stderr(&oa));
    assert_eq!(code(&ob), 0, "{}", stderr(&ob));

    let fa = read_dir_sorted(a.path());
    let fb = read_dir_sorted(b.path());
    assert_eq!(fa.iter().map(|f| &f.0).collect::<Vec<_>>(), fb.iter().map(|f| &f.0).collect::<Vec<_>>());
    assert!(fa.iter().any(|f| f.0 == "spacegraph.dot"));
    assert!(fa.iter().any(|f| f.0 == "decohere.csv"));
    for ((name, x), (_, y)) in fa.iter().zip(&fb) {
        if name == "summary.json" {
            assert_eq!(strip_timestamp(x), strip_timestamp(y));
            let v: Value = serde_json::from_slice(x).unwrap();
            assert_valid("bundle-summary.schema.json", &v);
            assert_eq!(v["runs"].as_array().unwrap().len(), 9);
        } else {
            assert_eq!(x, y, "{name} differs between runs");
            if name.ends_with(".json") {
                assert_report_valid(&serde_json::from_slice(x).unwrap());
            }
        }
    }
}

#[test]
fn bundle_exit_is_worst_child() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(root().join("models/ising3.json"), dir.path().join("m.json")).unwrap();
    let write = |name: &str, runs: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, format!(r#"{{"runs": [{runs}]}}"#)).unwrap();
        p
    };
    let ok = r#"{"experiment": "certify", "model_file": "m.json", "params": {"witness": "time:1"}}"#;
    let mismatch = r#"{"experiment": "certify", "model_file": "m.json", "params": {"witness": "phase:1"}}"#;
    let broken = r#"{"experiment": "certify", "model_file": "missing.json", "params": {"witness": "time:1"}}"#;
    let bundle_code = |p: PathBuf| code(&qslab(&["bundle", p.to_str().unwrap()]));
    assert_eq!(bundle_code(write("empty.json", "")), 0);
    assert_eq!(bundle_code(write("ok.json", ok)), 0);
    assert_eq!(bundle_code(write("mm.json", &format!("{ok},{mismatch}"))), 2);
    assert_eq!(bundle_code(write("err.json", &format!("{mismatch},{broken},{ok}"))), 1);
    let o = qslab(&["bundle", dir.path().join("err.json").to_str().unwrap()]);
    let v = stdout_json(&o);
    assert_valid("bundle-summary.schema.json", &v);
    assert_eq!(v["runs"][1]["status"], "error");
    assert!(v["runs"][1]["error"].as_str().unwrap().contains("i/o error"));
}
