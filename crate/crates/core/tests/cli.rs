use std::path::Path;
use std::process::{Command, Output};

fn bayescv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bayescv"))
        .current_dir(dir)
        .env_remove("BAYESCV_OUT_ROOT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = bayescv(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("--config"));
}

#[test]
fn missing_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bayescv(dir.path(), &["--config", "does/not/exist.toml"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn bad_flag_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bayescv(dir.path(), &["--mode", "bogus"]).status.code(), Some(2));
}

#[test]
fn misspelled_key_is_reported_with_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[modle]\nname = \"regular_normal\"\n[plan]\nreplicats = 3\n").unwrap();
    let o = bayescv(dir.path(), &["--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("did you mean `model`"), "{e}");
    assert!(e.contains("did you mean `replicates`"), "{e}");
}

#[test]
fn oracle_check_passes_and_stays_in_its_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = bayescv(dir.path(), &["--mode", "oracle-check", "--out", "oc"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("PASS"));
    assert!(o.stdout.is_empty());
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries, vec!["oc"]);
    let csv = std::fs::read_to_string(dir.path().join("oc/oracle_check.csv")).unwrap();
    assert_eq!(csv.lines().count(), 15);
    assert!(!csv.contains("false"));
}

#[test]
fn evaluate_writes_report_under_out_root() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "mode = \"evaluate\"\noutput_dir = \"eval\"\n[plan]\nn = 30\ntest_size = 500\ncv1 = true\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bayescv"))
        .current_dir(dir.path())
        .env("BAYESCV_OUT_ROOT", "root")
        .args(["--config", "c.toml", "--seed", "9"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("root/eval");
    let csv = std::fs::read_to_string(out.join("reports.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 21);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "30");
    assert!(!row[6].is_empty(), "cv1 requested");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 9);
    assert_eq!(manifest["config"]["master_seed"], 9);
    let echoed = std::fs::read_to_string(out.join("config.toml")).unwrap();
    let again = bayescv::config::RunConfig::from_toml_str(&echoed).unwrap();
    assert_eq!(again.to_toml_string().unwrap(), echoed);
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        r#"
mode = "evaluate"
[truth]
mean = [1e200]
[posterior]
backend = "mcmc"
chains = 1
burn_in = 10
draws_per_chain = 10
[plan]
n = 5
test_size = 0
"#,
    )
    .unwrap();
    let o = bayescv(dir.path(), &["--config", "c.toml", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
