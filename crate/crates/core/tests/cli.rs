use std::fs;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_quadromech"));
    c.env_remove("QUADROMECH_THREADS");
    c
}

#[test]
fn jopt_prints_five_decimals() {
    let out = bin()
        .args(["jopt", "--gamma-c", "1", "--gamma-m", "0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0.40620\n");
}

#[test]
fn jopt_rejects_bad_rate() {
    let out = bin().args(["jopt", "--gamma-m=-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .starts_with("error[INVALID_INPUT]"));
}

#[test]
fn missing_config() {
    let out = bin().args(["run", "--config", "missing.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("error[CONFIG_NOT_FOUND]"));
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"scenario": "fig2a", "colour": "blue"}"#).unwrap();
    let out = bin().arg("run").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("error[CONFIG_PARSE]"));
}

#[test]
fn invalid_sweep_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(
        &path,
        r#"{"sweep": {"scenario": "custom", "axes": [{"parameter": "j", "min": 1, "max": 1, "count": 4}], "outputs": ["n_a"]}}"#,
    )
    .unwrap();
    let out = bin().arg("run").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("error[CONFIG_INVALID]"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
    assert_eq!(
        bin()
            .args(["run", "--scenario", "fig9"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn custom_run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{
            "sweep": {
                "scenario": "custom",
                "axes": [{"parameter": "j", "min": 0.3, "max": 0.5, "count": 3}],
                "fixed": {"epsilon": 0.05, "n_th": 1e-4},
                "outputs": ["n_a", "g2_aa_0"],
                "space": {"n_photon_max": 2, "n_phonon_max": 6}
            },
            "formats": ["csv", "json"],
            "parallelism": 2
        }"#,
    )
    .unwrap();
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("custom.csv")).unwrap();
    let lines: Vec<&str> = csv.split('\n').collect();
    assert_eq!(lines[0], "J_over_gc,n_a,g2_aa_0");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[4], "");
    assert!(!csv.contains('\r'));
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.3);

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("custom.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 3);
    assert!(json["provenance"]["code_version"]
        .as_str()
        .unwrap()
        .starts_with("quadromech"));
    let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
    assert_eq!(keys, vec!["provenance", "rows", "spec"]);
}

#[test]
fn thread_variable_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("QUADROMECH_THREADS", "zero")
        .args(["run", "--scenario", "fig2ef", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("INVALID_THREADS"));
}

#[test]
fn spectrum_table() {
    let out = bin().args(["spectrum", "--manifold", "2"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("|0,2>") && text.contains("|1,0>"));
    assert!(text.contains("-1.4142135624") && text.contains(" 1.4142135624"));
    assert_eq!(
        bin()
            .args(["spectrum", "--manifold", "5"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn validate_passes() {
    let out = bin().arg("validate").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
