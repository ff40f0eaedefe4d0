use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quench_core::config::ExperimentConfig;
use quench_core::harness::config_from_summary;

const SMALL: &str = r#"
rng_seed = 11
observables = ["loschmidt_echo", "sigma_z(0)"]
analysis = ["two_mode", "gaussian"]

[model]
sites = 8
kappa = 0.4
field = 0.218

[quench]
delta_h = 0.04
sum_rule_accuracy = 1e-10

[sampling]
horizon = 2000.0
samples = 4000
bins = 41
"#;

fn quench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quench"))
        .args(args)
        .current_dir(cwd)
        .env_remove("QUENCH_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    dir
}

#[test]
fn validate_accepts_shipped_configs() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    for name in ["critical", "critical_dh002", "regular", "scaling", "zero_quench"] {
        let path = root.join("configs").join(format!("{name}.toml"));
        let out = quench(&["validate", path.to_str().unwrap()], root);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bad_config_exits_one() {
    let dir = setup();
    fs::write(dir.path().join("bad.toml"), SMALL.replace("sites = 8", "sites = 1")).unwrap();
    let out = quench(&["validate", "bad.toml"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sites"));

    fs::write(dir.path().join("typo.toml"), SMALL.replace("bins", "bims")).unwrap();
    assert_eq!(code(&quench(&["validate", "typo.toml"], dir.path())), 1);
}

#[test]
fn usage_errors_exit_one() {
    let dir = setup();
    assert_eq!(code(&quench(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&quench(&[], dir.path())), 1);
    assert_eq!(code(&quench(&["run", "small.toml", "--threads", "x"], dir.path())), 1);
    assert_eq!(code(&quench(&["--help"], dir.path())), 0);
}

#[test]
fn missing_config_file_is_io() {
    let dir = setup();
    assert_eq!(code(&quench(&["validate", "nope.toml"], dir.path())), 3);
}

#[test]
fn missing_output_dir_exits_three() {
    let dir = setup();
    let out = quench(&["run", "small.toml", "--output-dir", "absent"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(!dir.path().join("absent").exists());
}

#[test]
fn version_prints() {
    let dir = setup();
    let out = quench(&["version"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("quench "));
}

fn run_into(dir: &Path, sub: &str, extra: &[&str]) {
    fs::create_dir_all(dir.join(sub)).unwrap();
    let mut args = vec!["run", "small.toml", "--output-dir", sub];
    args.extend_from_slice(extra);
    let out = quench(&args, dir);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn run_writes_tables() {
    let dir = setup();
    run_into(dir.path(), "out", &[]);
    let names = listing(&dir.path().join("out"));
    for expect in [
        "spectrum.tsv",
        "series_loschmidt_echo.tsv",
        "timeseries_sigma_z_0.tsv",
        "histogram_loschmidt_echo.tsv",
        "reference_loschmidt_echo_two_mode.tsv",
        "reference_sigma_z_0_gaussian.tsv",
        "summary.toml",
        "timing.txt",
    ] {
        assert!(names.iter().any(|n| n == expect), "{expect} missing from {names:?}");
    }
    let hist = fs::read_to_string(dir.path().join("out/histogram_loschmidt_echo.tsv")).unwrap();
    let rows: Vec<Vec<f64>> = hist
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(|l| l.split('\t').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 41);
    let mass: f64 = rows.iter().map(|r| (r[1] - r[0]) * r[2]).sum();
    assert!((mass - 1.0).abs() < 1e-9);
    let count: f64 = rows.iter().map(|r| r[3]).sum();
    assert_eq!(count, 4000.0);
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let (one, three) = (setup(), setup());
    run_into(one.path(), "out", &["--threads", "1"]);
    run_into(three.path(), "out", &["--threads", "3"]);
    let a = listing(&one.path().join("out"));
    assert_eq!(a, listing(&three.path().join("out")));
    for name in a.iter().filter(|n| *n != "timing.txt") {
        let x = fs::read(one.path().join("out").join(name)).unwrap();
        let y = fs::read(three.path().join("out").join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn seed_override_changes_samples_only() {
    let dir = setup();
    run_into(dir.path(), "a", &[]);
    run_into(dir.path(), "b", &["--seed", "12"]);
    let read = |d: &str, f: &str| {
        let text = fs::read_to_string(dir.path().join(d).join(f)).unwrap();
        text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(read("a", "spectrum.tsv"), read("b", "spectrum.tsv"));
    assert_ne!(read("a", "timeseries_loschmidt_echo.tsv"), read("b", "timeseries_loschmidt_echo.tsv"));
}

#[test]
fn summary_carries_the_config() {
    let dir = setup();
    run_into(dir.path(), "out", &[]);
    let text = fs::read_to_string(dir.path().join("out/summary.toml")).unwrap();
    let back = config_from_summary(&text).unwrap();
    let mut orig = ExperimentConfig::from_toml(SMALL).unwrap();
    orig.output_dir = "out".into();
    assert_eq!(back, orig);
}

#[test]
fn scaling_subcommand_writes_fits() {
    let dir = setup();
    let cfg = SMALL.to_string()
        + r#"
[[scaling.probe]]
kind = "matrix_elements"
kappa = 0.4
field = 0.218
sizes = [6, 8, 10]
"#;
    fs::write(dir.path().join("small.toml"), cfg).unwrap();
    fs::create_dir(dir.path().join("out")).unwrap();
    let out = quench(&["scaling", "small.toml", "--output-dir", "out"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/scaling_matrix_elements.tsv").exists());
    assert!(!dir.path().join("out/spectrum.tsv").exists());
}
