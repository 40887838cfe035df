use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[model]
preset = "natural-scale"
half_width = 8.0

[grid]
nodes = 129

[value]
residual_samples = 5

[simulation]
rules = ["extremal", "range_threshold(1)"]

[simulation.path]
dt = 1e-3
horizon = 20.0
n_paths = 2000
seed = 7
"#;

fn htd(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_htd"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("HTD_THREADS")
        .output()
        .unwrap()
}

// The echoed config differs only in `out_dir`.
fn reports(dir: &Path) -> String {
    let text = fs::read_to_string(dir.join("out/simulation.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["reports"].to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by a signal")
}

#[test]
fn surfaces_writes_echoed_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = htd(dir.path(), SMALL, &["surfaces"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/surfaces.csv")).unwrap();
    assert!(csv.starts_with('#'));
    assert!(csv.contains("natural-scale"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/surfaces.json")).unwrap()).unwrap();
    assert_eq!(json["nodes"], 129);
    assert_eq!(json["config"]["grid"]["nodes"], 129);
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = htd(a.path(), SMALL, &["simulate", "--threads", "1"]);
    let ob = htd(b.path(), SMALL, &["simulate", "--threads", "3"]);
    assert_eq!(code(&oa), 0, "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(code(&ob), 0);
    let ja = reports(a.path());
    assert_eq!(ja, reports(b.path()));
    assert_eq!(oa.stdout, ob.stdout);

    let oc = htd(b.path(), SMALL, &["simulate", "--seed", "8"]);
    assert_eq!(code(&oc), 0);
    assert_ne!(ja, reports(b.path()));
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SMALL.replace("n_paths = 2000", "n_paths = 50")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_htd"))
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .env("HTD_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn trace_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let config = SMALL.replace("[simulation.path]", "trace_path = 3\n\n[simulation.path]");
    let o = htd(dir.path(), &config, &["simulate"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(dir.path().join("out/trace_0.csv")).unwrap();
    let header = trace.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t,x,i,s,f_star,g_star,stopped");
    assert!(trace.trim_end().ends_with("true"));
}

#[test]
fn validate_passes_on_a_small_natural_scale_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = htd(dir.path(), SMALL, &["validate"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}{}", String::from_utf8_lossy(&o.stderr));
    assert!(!stdout.contains("FAIL"), "{stdout}");
    assert!(stdout.contains("surfaces match"));
    assert!(dir.path().join("out/validation.json").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for (config, cmd) in [
        (SMALL.replace("nodes = 129", "nodes = 0"), "surfaces"),
        (SMALL.replace("nodes = 129", "node = 129"), "surfaces"),
        (SMALL.replace("range_threshold(1)", "median"), "simulate"),
        (SMALL.replace("[simulation]", "[simulation]\nmode = \"detection\""), "simulate"),
        (SMALL.replace("dt = 1e-3", "dt = -1.0"), "simulate"),
    ] {
        let o = htd(dir.path(), &config, &[cmd]);
        assert_eq!(code(&o), 2, "{config}\n{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
}

#[test]
fn failed_residual_check_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = SMALL.replace("[value]", "[tolerances]\nresidual = 1e-300\n\n[value]");
    let o = htd(dir.path(), &config, &["value"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("out/values.csv").exists());
}

#[test]
fn missing_config_file_exits_with_two() {
    let o = Command::new(env!("CARGO_BIN_EXE_htd"))
        .args(["surfaces", "--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    let o = Command::new(env!("CARGO_BIN_EXE_htd")).arg("frobnicate").output().unwrap();
    assert_eq!(code(&o), 2);
}
