use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vibrosqueeze"));
    c.env_remove("VIBROSQUEEZE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn point_reproduces_atomic_optimum() {
    let o = run(&["point", "--no-phonons", "--set", "s=0.3333333333333333"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: f64 = column(&stdout(&o), "min_variance")[0].parse().unwrap();
    assert!((v + 0.125).abs() < 1e-9, "{v}");
}

#[test]
fn point_json_output() {
    let o = run(&["point", "--format", "json", "--set", "s=10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("\"schema_version\": 1"));
    assert!(text.contains("\"min_variance\""));
}

#[test]
fn bad_set_and_bad_config_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"schema_version": 1, "phonons": {"temperature": {"value": 0, "unit": "K"}}}"#).unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("phonons.temperature"));

    let o = run(&["point", "--set", "temperature_k=-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(&["preset", "fig9"]).status.code(), Some(1));
    assert_eq!(run(&["sweep"]).status.code(), Some(1));
}

#[test]
fn sweep_writes_three_rows_and_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1,
            "axes": [{"parameter": "s", "scale": "log10", "min": 1, "max": 1e6, "count": 3}],
            "models": ["full_phonon"]}"#,
    )
    .unwrap();
    let out1 = dir.path().join("a.csv");
    let out4 = dir.path().join("b.csv");
    let a = run(&["sweep", "--config", cfg.to_str().unwrap(), "--threads", "1", "--out", out1.to_str().unwrap()]);
    assert!(a.status.success());
    let b = bin()
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--out", out4.to_str().unwrap()])
        .env("VIBROSQUEEZE_THREADS", "4")
        .output()
        .unwrap();
    assert!(b.status.success());
    let (ta, tb) = (fs::read(&out1).unwrap(), fs::read(&out4).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(String::from_utf8(ta).unwrap().lines().count(), 4);
}

#[test]
fn sweep_with_error_rows_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1,
            "axes": [{"parameter": "dephasing_ratio", "scale": "linear", "min": -1, "max": 0, "count": 2}],
            "models": ["atomic"]}"#,
    )
    .unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let codes = column(&stdout(&o), "error_code");
    assert_eq!(codes, vec!["invalid_parameter".to_string(), String::new()]);
}

#[test]
fn preset_emit_config_round_trips_through_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig3c.json");
    let o = run(&["preset", "fig3c", "--emit-config", "--resolution", "2", "--out", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert!(column(&text, "f_sv_matched").iter().all(|c| !c.is_empty()));
}

#[test]
fn wigner_command_emits_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("w.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1, "wigner": {"grid": {"nx": 11, "np": 11},
            "states": [{"label": "vacuum", "model": "atomic", "set": {"s": 0}}]}}"#,
    )
    .unwrap();
    let o = run(&["wigner", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("\"label\": \"vacuum\""));
    let o = run(&["wigner", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("# vacuum\n"));
    assert_eq!(text.lines().count(), 12);
}
