use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lproth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lproth")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn identical_runs_agree_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["run", "--suite", "kernels", "--p", "1.5", "--d", "2", "--epsilon", "0.05", "--seed", "7", "--out", out];
    assert_eq!(code(&lproth(&args)), 0);
    let first = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let profile = fs::read(dir.path().join("kernel_profile.csv")).unwrap();
    assert_eq!(code(&lproth(&args)), 0);
    let second = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let cut = |s: &str| s[..s.find("\"timing\"").unwrap()].to_string();
    assert_eq!(cut(&first), cut(&second));
    assert_eq!(profile, fs::read(dir.path().join("kernel_profile.csv")).unwrap());
    let mut a: serde_json::Value = serde_json::from_str(&first).unwrap();
    let mut b: serde_json::Value = serde_json::from_str(&second).unwrap();
    a.as_object_mut().unwrap().remove("timing");
    b.as_object_mut().unwrap().remove("timing");
    assert_eq!(a, b);
    assert!(!dir.path().join("report.json.tmp").exists());
}

#[test]
fn usage_errors_exit_with_one() {
    let o = lproth(&["run", "--p", "1.5"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--suite"));
    assert_eq!(code(&lproth(&["run", "--suite", "kernels", "--bogus", "1"])), 1);
    assert_eq!(code(&lproth(&["frobnicate"])), 1);
    assert_eq!(code(&lproth(&["run", "--suite", "search", "--p", "2"])), 1);
    assert_eq!(code(&lproth(&["run", "--suite", "verify-all", "--p", "1"])), 1);
    assert_eq!(code(&lproth(&["run", "--suite", "kernels", "--d", "9"])), 1);
    assert_eq!(code(&lproth(&["run", "--suite", "kernels", "--format", "xml"])), 1);
    let threads = Command::new(env!("CARGO_BIN_EXE_lproth"))
        .args(["run", "--suite", "kernels"])
        .env("LPROTH_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&threads), 1);
}

#[test]
fn config_files_are_checked_and_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# search settings\nsuite = search\np = 2\n").unwrap();
    let o = lproth(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));

    fs::write(&cfg, "suite = kernels\nbudget = 5\n").unwrap();
    let o = lproth(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`budget`"));

    let out = dir.path().join("out");
    fs::write(&cfg, "suite = gowers\nseed = 3\np = 3  # cubic\nd = 1\n").unwrap();
    let o = lproth(&["run", "--config", cfg.to_str().unwrap(), "--suite", "kernels", "--seed", "11", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rep = read_json(&out.join("report.json"));
    assert_eq!(rep["config"]["suite"], "kernels");
    assert_eq!(rep["config"]["seed"], 11);
    assert_eq!(rep["config"]["p"], 3.0);
    assert_eq!(rep["config"]["d"], 1);
}

#[test]
fn unwritable_output_is_an_internal_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = lproth(&["run", "--suite", "kernels", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn degenerate_oscillatory_run_records_no_decay() {
    let dir = tempfile::tempdir().unwrap();
    let o = lproth(&["run", "--suite", "oscillatory", "--p", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rep = read_json(&dir.path().join("report.json"));
    let rec = rep["records"].as_array().unwrap().iter().find(|r| r["name"] == "decay-dichotomy").unwrap();
    assert_eq!(rec["anchor"], "oscillatory.no-decay");
    assert_eq!(rec["pass"], true);
    let decay = fs::read_to_string(dir.path().join("decay.csv")).unwrap();
    assert!(decay.starts_with("t,abs_I,envelope\n"));
    assert!(!decay.contains('\r'));
    let multiplier = fs::read_to_string(dir.path().join("multiplier.csv")).unwrap();
    assert!(multiplier.starts_with("dist,abs_m,grad_m\n"));
}

#[test]
fn verify_all_on_reference_settings() {
    let dir = tempfile::tempdir().unwrap();
    let o = lproth(&["run", "--suite", "verify-all", "--seed", "7", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rep = read_json(&dir.path().join("report.json"));
    assert_eq!(rep["format"], 1);
    let records = rep["records"].as_array().unwrap();
    assert!(records.len() >= 30);
    assert!(records.iter().all(|r| r["anchor"].as_str().is_some_and(|a| !a.is_empty())));
    assert_eq!(rep["summary"]["failed"], 0);
    for name in rep["sidecars"].as_array().unwrap() {
        assert!(dir.path().join(name.as_str().unwrap()).exists());
    }
    let gaps = fs::read_to_string(dir.path().join("gap_spectrum_p2.csv")).unwrap();
    assert!(gaps.starts_with("gap,count\n"));
    let profile = fs::read_to_string(dir.path().join("kernel_profile.csv")).unwrap();
    assert!(profile.starts_with("r,omega_eps\n"));
    assert!(profile.lines().nth(1).unwrap().contains('e'));
}

#[test]
fn csv_report_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = lproth(&["run", "--suite", "gowers", "--format", "csv", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("name,anchor,observed,relation,bound,pass\n"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn list_and_schema() {
    let o = lproth(&["list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for s in ["kernels", "gowers", "forms", "oscillatory", "counterexamples", "search", "verify-all"] {
        assert!(text.contains(s));
    }
    let o = lproth(&["schema"]);
    assert_eq!(code(&o), 0);
    let schema: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(schema["properties"]["format"]["const"], 1);
}
