//! Command-line contract: exit codes, formats, configuration.

use std::io::Write;
use std::process::{Command, Output};

use renormvol::report::{parse_results, CheckResult};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renormvol")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_timing(mut rs: Vec<CheckResult>) -> Vec<CheckResult> {
    for r in &mut rs {
        r.runtime_ms = 0;
    }
    rs
}

#[test]
fn models_list_names_builtins() {
    let o = cli(&["models", "list"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    for name in ["h3", "h4", "h5", "h6", "flat_collar3"] {
        assert!(s.contains(name));
    }
}

#[test]
fn scenario_run_passes_and_is_deterministic() {
    let a = cli(&["run", "h4"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = cli(&["run", "h4"]);
    let (ra, rb) = (parse_results(&stdout(&a)).unwrap(), parse_results(&stdout(&b)).unwrap());
    assert!(ra.iter().any(|r| r.check_id == "q_integral_volume" && r.rel_err <= 1e-6));
    assert_eq!(without_timing(ra), without_timing(rb));
    let h3 = parse_results(&stdout(&cli(&["run", "h3"]))).unwrap();
    assert!(h3.iter().any(|r| r.check_id == "scattering_volume_even" && r.passed));
}

#[test]
fn failing_checks_exit_one() {
    assert_eq!(code(&cli(&["run", "h4", "--b0-perturbation", "0.01"])), 1);
    assert_eq!(code(&cli(&["run", "h5", "--fit-log-term", "false"])), 1);
    assert_eq!(code(&cli(&["run", "h4", "--warp-perturbation", "1e-3"])), 1);
    assert_eq!(code(&cli(&["run", "h4", "--tolerance", "volume_fit=1e-30"])), 1);
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(code(&cli(&["run", "nonexistent"])), 2);
    assert_eq!(code(&cli(&["volume", "--n", "1"])), 2);
    assert_eq!(code(&cli(&["run", "h4", "--kappa", "3"])), 2);
    assert_eq!(code(&cli(&["run", "h4", "--tolerance", "nonsense=1"])), 2);
    assert_eq!(code(&cli(&["run", "h4", "--format", "yaml"])), 2);
    let o = cli(&["run", "h4", "--boundary-volume", "-2"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("boundary_volume"));
}

#[test]
fn config_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("h4.toml");
    let mut f = std::fs::File::create(&cfg).unwrap();
    writeln!(f, "name = \"h4-file\"\nn = 3\nkappa = 1\nboundary_volume = \"default\"\n[methods]\nscattering = false\n[tolerances]\nvolume_fit = 1e-8").unwrap();
    let out = dir.path().join("results.json");
    let o = cli(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rs = parse_results(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(rs.iter().all(|r| r.check_id != "scattering_volume"));
    assert!(rs.iter().any(|r| r.check_id == "volume_fit" && r.tolerance == 1e-8));

    let csv = cli(&["report", out.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&csv), 0);
    assert_eq!(stdout(&csv).lines().count(), rs.len() + 1);
    let md = cli(&["report", out.to_str().unwrap(), "--format", "markdown"]);
    assert!(stdout(&md).contains("| identity |"));

    std::fs::write(&cfg, "name = \"x\"\nn = 3\nkappa = 1\nunknown_key = 2\n").unwrap();
    assert_eq!(code(&cli(&["run", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn computation_subcommands_emit_json() {
    for args in [&["volume", "h4"][..], &["vsolve", "h4"], &["gb", "h4"], &["scatter", "h3"]] {
        let o = cli(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(v.is_object());
    }
    let gb: serde_json::Value = serde_json::from_str(&stdout(&cli(&["gb", "h4"]))).unwrap();
    assert!((gb["gauss_bonnet"]["chi"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(code(&cli(&["gb", "h3"])), 1);
}

#[test]
fn verify_all_passes() {
    let o = cli(&["verify-all", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let rs = parse_results(&stdout(&o)).unwrap();
    assert!(rs.len() > 50);
}

#[test]
fn tolerance_scale_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_renormvol"))
        .args(["run", "h4"])
        .env("RENORMVOL_TOL_SCALE", "1e-25")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_renormvol"))
        .args(["run", "h4"])
        .env("RENORMVOL_TOL_SCALE", "abc")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
