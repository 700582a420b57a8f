//! End-to-end tests of the qplane binary: exit codes, output shapes, the
//! run store, and environment overrides.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const FULL: &str = r#"{"q": "1/2", "spectrum": "full"}"#;
const ONE: &str = r#"{"q": "1/2", "spectrum": {"intervals": [["3/5", "7/10"]]}}"#;
const TEO: &str = r#"{"q": "1/2", "spectrum": {"intervals": [
    ["13/25", "11/20"], ["3/5", "31/50"], ["7/10", "18/25"]
]}}"#;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qplane"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn out(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn err(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn kgroups_reports_both_unitality_variants() {
    let dir = tempfile::tempdir().unwrap();
    let full = write_config(dir.path(), "full.json", FULL);
    let o = run(&["kgroups", "--config", full.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", err(&o));
    let text = out(&o);
    assert!(text.contains("K0 = Z^2, K1 = 0 (unital)"), "{}", text);
    assert!(text.contains("K0 = Z^1, K1 = 0 (non-unital)"), "{}", text);
    assert!(text.contains("[R_1]"), "{}", text);

    let teo = write_config(dir.path(), "teo.json", TEO);
    let o = run(&["kgroups", "--config", teo.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0);
    let text = out(&o);
    assert!(text.contains("K0 = Z^5, K1 = 0 (unital)"), "{}", text);
    assert!(text.contains("K0 = Z^4, K1 = 0 (non-unital)"), "{}", text);
    // Generator names carry the defining intervals.
    assert!(text.contains("[χ_[0,q)]"), "{}", text);
    assert!(text.contains("[χ_(51/100,1)]"), "{}", text);
}

#[test]
fn broken_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["kgroups", "--config", dir.path().join("nope.json").to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&o), 2);

    let empty = write_config(
        dir.path(),
        "empty.json",
        r#"{"q": "1/2", "spectrum": {"intervals": []}}"#,
    );
    let o = run(&["kgroups", "--config", empty.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(err(&o).contains("at least one interval"), "{}", err(&o));

    let garbage = write_config(dir.path(), "bad.json", "not json at all");
    let o = run(&["kgroups", "--config", garbage.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);

    let no_q = write_config(dir.path(), "noq.json", r#"{"spectrum": "full"}"#);
    let o = run(&["kgroups", "--config", no_q.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(err(&o).contains("\"q\""), "{}", err(&o));
}

#[test]
fn pair_computes_winding_numbers_and_exact_traces() {
    let dir = tempfile::tempdir().unwrap();
    let teo = write_config(dir.path(), "teo.json", TEO);
    let cfg = teo.to_str().unwrap();

    let o = run(&["pair", "--config", cfg, "--class", "bott:3", "--hom", "F:0"], &[]);
    assert_eq!(code(&o), 0, "{}", err(&o));
    assert!(out(&o).contains("⟨F[0], P_3⟩ = 3"), "{}", out(&o));

    let o = run(&["pair", "--config", cfg, "--class", "pr:2", "--hom", "evinf"], &[]);
    assert_eq!(code(&o), 0);
    let text = out(&o);
    assert!(text.contains("⟨ev_inf, R_2⟩ = 0"), "{}", text);
    assert!(text.contains("(exact)"), "{}", text);

    let o = run(
        &["pair", "--config", cfg, "--class", "chi:(q^3,1)", "--hom", "F:0"],
        &[],
    );
    assert_eq!(code(&o), 0);
    assert!(out(&o).contains("= 3"), "{}", out(&o));

    let o = run(&["pair", "--config", cfg, "--class", "unit", "--hom", "F:0"], &[]);
    assert_eq!(code(&o), 0);
    assert!(out(&o).contains("⟨F[0], 1⟩ = 0"), "{}", out(&o));

    // A witness chosen by hand, inside the middle component.
    let o = run(
        &["pair", "--config", cfg, "--class", "bott:2", "--hom", "F:y=61/100"],
        &[],
    );
    assert_eq!(code(&o), 0);
    assert!(out(&o).contains("= 2"), "{}", out(&o));
}

#[test]
fn window_cap_is_a_convergence_failure() {
    let dir = tempfile::tempdir().unwrap();
    let full = write_config(dir.path(), "full.json", FULL);
    let o = run(
        &["pair", "--config", full.to_str().unwrap(), "--class", "bott:1", "--hom", "F:0"],
        &[("QPLANE_MAX_WINDOW", "2")],
    );
    assert_eq!(code(&o), 3, "{}", err(&o));
    assert!(err(&o).contains("did not converge"), "{}", err(&o));
}

#[test]
fn bad_class_and_hom_specs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let teo = write_config(dir.path(), "teo.json", TEO);
    let cfg = teo.to_str().unwrap();

    for (class, hom) in [
        ("bogus", "ev0"),
        ("bott:x", "ev0"),
        ("chi:(1,2", "ev0"),
        ("bott:1", "F:7"),
        ("bott:1", "nope"),
        ("bott:1", "F:y=0"),
        // Endpoints touching the spectrum do not give an indicator in the
        // algebra.
        ("chi:(11/20,3/5)", "ev0"),
    ] {
        let o = run(&["pair", "--config", cfg, "--class", class, "--hom", hom], &[]);
        assert_eq!(code(&o), 2, "class {} hom {}: {}", class, hom, err(&o));
    }
}

#[test]
fn verify_appends_one_run_per_invocation() {
    let dir = tempfile::tempdir().unwrap();
    let full = write_config(dir.path(), "full.json", FULL);
    let store = dir.path().join("runs.ndjson");
    let args = [
        "verify",
        "--config",
        full.to_str().unwrap(),
        "--suite",
        "tip",
        "--store",
        store.to_str().unwrap(),
    ];

    let o = run(&args, &[]);
    assert_eq!(code(&o), 0, "{}", err(&o));
    assert!(out(&o).contains("verify tip: pass"), "{}", out(&o));
    assert!(err(&o).contains("stored as run 1"), "{}", err(&o));

    let o = run(&args, &[]);
    assert_eq!(code(&o), 0);
    assert!(err(&o).contains("stored as run 2"), "{}", err(&o));

    let body = std::fs::read_to_string(&store).unwrap();
    assert_eq!(body.lines().count(), 2);
    // Same config both times, so the stored hashes agree.
    let first: serde_json::Value = serde_json::from_str(body.lines().next().unwrap()).unwrap();
    let second: serde_json::Value = serde_json::from_str(body.lines().nth(1).unwrap()).unwrap();
    assert_eq!(first["config_hash"], second["config_hash"]);
    assert_eq!(first["pass"], serde_json::Value::Bool(true));
}

#[test]
fn verify_honours_the_store_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let full = write_config(dir.path(), "full.json", FULL);
    let store = dir.path().join("env-store.ndjson");
    let o = run(
        &["verify", "--config", full.to_str().unwrap(), "--suite", "tip"],
        &[("QPLANE_STORE", store.to_str().unwrap())],
    );
    assert_eq!(code(&o), 0, "{}", err(&o));
    assert_eq!(std::fs::read_to_string(&store).unwrap().lines().count(), 1);
}

#[test]
fn verify_suite_mismatches_exit_one_and_are_still_stored() {
    let dir = tempfile::tempdir().unwrap();
    let full = write_config(dir.path(), "full.json", FULL);
    let store = dir.path().join("runs.ndjson");
    // A window cap this small breaks the adaptive pairings, so the suite
    // reports mismatches rather than a hard error.
    let o = run(
        &[
            "verify",
            "--config",
            full.to_str().unwrap(),
            "--suite",
            "tip",
            "--store",
            store.to_str().unwrap(),
        ],
        &[("QPLANE_MAX_WINDOW", "2")],
    );
    assert_eq!(code(&o), 1, "{}", err(&o));
    assert!(out(&o).contains("verify tip: FAIL"), "{}", out(&o));
    let body = std::fs::read_to_string(&store).unwrap();
    let rec: serde_json::Value = serde_json::from_str(body.lines().next().unwrap()).unwrap();
    assert_eq!(rec["pass"], serde_json::Value::Bool(false));
}

#[test]
fn teo_suite_needs_a_generic_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let full = write_config(dir.path(), "full.json", FULL);
    let store = dir.path().join("runs.ndjson");
    let o = run(
        &[
            "verify",
            "--config",
            full.to_str().unwrap(),
            "--suite",
            "teo",
            "--store",
            store.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&o), 2, "{}", err(&o));
    assert!(!store.exists(), "nothing should be stored on a usage error");

    let o = run(
        &[
            "verify",
            "--config",
            full.to_str().unwrap(),
            "--suite",
            "nope",
            "--store",
            store.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn decompose_prints_the_basis_identities() {
    let dir = tempfile::tempdir().unwrap();
    let one = write_config(dir.path(), "one.json", ONE);
    let cfg = one.to_str().unwrap();

    let o = run(&["decompose", "--config", cfg, "--class", "bott:2"], &[]);
    assert_eq!(code(&o), 0, "{}", err(&o));
    assert_eq!(out(&o).trim(), "[P_2] = [1] + 2·[χ_(q,1)]");

    let o = run(
        &["decompose", "--config", cfg, "--class", "chi:(q^3,1)", "--non-unital"],
        &[],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(out(&o).trim(), "[χ_(q^3,1)] = 3·[χ_(q,1)]");

    let o = run(&["decompose", "--config", cfg, "--class", "unit"], &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(out(&o).trim(), "[1] = [1]");

    let o = run(&["decompose", "--config", cfg, "--class", "bott:-1"], &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(out(&o).trim(), "[P_-1] = [1] − [χ_(q,1)]");

    // The unit obstructs membership in the non-unital lattice.
    let o = run(
        &["decompose", "--config", cfg, "--class", "bott:1", "--non-unital"],
        &[],
    );
    assert_eq!(code(&o), 1, "{}", err(&o));
}

#[test]
fn json_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let teo = write_config(dir.path(), "teo.json", TEO);
    let cfg = teo.to_str().unwrap();

    let a = run(
        &["pair", "--config", cfg, "--class", "bott:2", "--hom", "F:1", "--json"],
        &[],
    );
    let b = run(
        &["pair", "--config", cfg, "--class", "bott:2", "--hom", "F:1", "--json"],
        &[],
    );
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout, "pair --json must be byte-identical");
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["payload"]["rounded"], serde_json::json!(2));
    assert_eq!(report["command"], serde_json::json!("pair"));
    assert_eq!(report["config"]["q"], serde_json::json!("1/2"));

    let store_a = dir.path().join("a.ndjson");
    let store_b = dir.path().join("b.ndjson");
    let a = run(
        &[
            "verify", "--config", cfg, "--suite", "corollaries",
            "--store", store_a.to_str().unwrap(), "--json",
        ],
        &[],
    );
    let b = run(
        &[
            "verify", "--config", cfg, "--suite", "corollaries",
            "--store", store_b.to_str().unwrap(), "--json",
        ],
        &[],
    );
    assert_eq!(code(&a), 0, "{}", err(&a));
    assert_eq!(a.stdout, b.stdout, "verify --json must be byte-identical");
}

#[test]
fn selftest_passes_on_the_builtin_configs() {
    let o = run(&["selftest"], &[]);
    assert_eq!(code(&o), 0, "{}", err(&o));
    assert!(out(&o).contains("selftest: pass"), "{}", out(&o));
    assert!(out(&o).contains("suite tip: pass"), "{}", out(&o));
    assert!(out(&o).contains("suite teo: pass"), "{}", out(&o));
    assert!(out(&o).contains("suite corollaries: pass"), "{}", out(&o));
    assert!(out(&o).contains("suite algebra: pass"), "{}", out(&o));
}
