use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qdopt(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdopt"))
        .args(args)
        .current_dir(cwd)
        .env_remove("QDOPT_THREADS")
        .output()
        .unwrap()
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn chain_config_writes_scaling_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("chain.cfg");
    let out = qdopt(&["chain", "--config", cfg.to_str().unwrap(), "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("res/chain.csv")).unwrap();
    assert!(csv.contains("# version = qdopt"));
    assert!(csv.contains("spring_k = 1.0"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 10);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let slope: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("log_log_slope = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((slope - 0.5).abs() < 0.02, "{slope}");
}

#[test]
fn missing_masses_is_a_config_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("h2plus.cfg"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("nuclear_masses"))
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(dir.path().join("bad.cfg"), text).unwrap();
    let out = qdopt(&["optimize", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error[config]"), "{err}");
    assert!(err.contains("model.nuclear_masses"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unreadable_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdopt(&["optimize", "--config", "absent.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[io]"));
}

#[test]
fn bad_thread_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qdopt"))
        .args(["chain"])
        .current_dir(dir.path())
        .env("QDOPT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn harmonic_config_optimizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("harmonic.cfg");
    let out = qdopt(&["optimize", "--config", cfg.to_str().unwrap(), "--out", "h"], dir.path());
    assert!(out.status.success());
    let stats = fs::read_to_string(dir.path().join("h/bond_stats.txt")).unwrap();
    let e: f64 = stats
        .lines()
        .find_map(|l| l.strip_prefix("energy = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((e - 0.5).abs() < 1e-3);
    assert!(dir.path().join("h/wavefunction.wpk.meta").exists());
}

const SMALL_REDUCED: &str = r#"
[model]
kind = "h2plus_reduced"
nuclear_masses = [1863.15, 1863.15]

[grid]
n_points = 8
step = 0.15

[propagator]
d_tau = 0.075
max_steps = 400

[sampling]
n_obs = 50
seed = 3

[output]
slice_electron = [0.075, 0.075]
"#;

#[test]
fn sample_runs_optimize_then_reuses_the_dump() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.cfg"), SMALL_REDUCED).unwrap();
    let out = qdopt(&["sample", "--config", "small.cfg", "--out", "a", "--seed", "11"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["wavefunction.wpk", "marginal.csv", "marginal.wpk", "slice.csv", "slice.wpk", "energy_trace.csv", "samples.csv", "sample_stats.txt"] {
        assert!(dir.path().join("a").join(name).exists(), "{name}");
    }
    let samples = fs::read_to_string(dir.path().join("a/samples.csv")).unwrap();
    assert!(samples.contains("# seed = 11"));
    assert!(samples.contains("prng_id = chacha20"));
    assert_eq!(samples.lines().filter(|l| !l.starts_with('#')).count(), 51);

    let reuse = format!("{SMALL_REDUCED}\n").replace("seed = 3", "seed = 11\ninput = \"a/wavefunction.wpk\"");
    fs::write(dir.path().join("reuse.cfg"), reuse).unwrap();
    let out = qdopt(&["sample", "--config", "reuse.cfg", "--out", "b"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let strip = |s: String| s.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    let again = fs::read_to_string(dir.path().join("b/samples.csv")).unwrap();
    assert_eq!(strip(samples), strip(again));
}

#[test]
fn off_grid_slice_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_REDUCED.replace("[0.075, 0.075]", "[0.0, 0.075]").replace("max_steps = 400", "max_steps = 10");
    fs::write(dir.path().join("c.cfg"), text).unwrap();
    let out = qdopt(&["optimize", "--config", "c.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("-0.075") && err.contains("0.075"), "{err}");
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdopt(&["validate", "--out", "v"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("passed = 6/6"));
}
