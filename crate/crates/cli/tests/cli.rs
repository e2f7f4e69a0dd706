use std::process::{Command, Output};

fn illpose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_illpose")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn taylor_json_matches_arithmetic() {
    let out = illpose(&["taylor", "--b", "0.5", "--mu0", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["taylor_sign"].as_f64(), Some(0.75));
    assert_eq!(v["stability_condition_holds"].as_bool(), Some(false));
}

#[test]
fn steady_json_has_schema() {
    let out = illpose(&["steady", "--b", "0.4", "--mu0", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["q", "grad_q", "HgradH", "residual", "taylor_sign"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!((v["taylor_sign"].as_f64().unwrap() - 0.92).abs() < 1e-15);
}

#[test]
fn mode_at_time_zero_is_at_rest() {
    let out = illpose(&["mode", "--n", "2", "--b", "0", "--t-end", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].split(',').all(|cell| cell.parse::<f64>().unwrap() == 0.0));
}

#[test]
fn growth_single_row_csv() {
    let out = illpose(&["growth", "--n-list", "16", "--t-end", "0.5", "--samples", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("n,t,E_plus,lower_bound"));
}

#[test]
fn floats_are_fixed_width_scientific() {
    let out = illpose(&["taylor", "--b", "0.5", "--mu0", "1"]);
    assert_eq!(stdout(&out), "taylor_sign,stability_condition_holds\n7.5000000000000000e-1,false\n");
}

#[test]
fn energies_report_invariants() {
    let out = illpose(&["energies", "--n", "64", "--b", "0.1", "--t-end", "0.5", "--dt", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,E_plus,E_minus,F,G,inv1,inv2,inv3,annihilated_mode");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(&cells[5..8], ["true", "true", "true"]);
    }
}

#[test]
fn engines_agree_on_evolve() {
    let run = |engine| {
        let out = illpose(&["evolve", "--n", "3", "--b", "0.2", "--t-end", "0.1", "--dt", "0.01", "--engine", engine]);
        assert_eq!(out.status.code(), Some(0));
        stdout(&out).lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse::<f64>().unwrap()).collect::<Vec<_>>()
    };
    let direct = run("rk4-weta");
    let split = run("rk4-decomposed");
    assert_eq!(direct.len(), 11);
    for (a, b) in direct.iter().zip(&split) {
        assert!((a - b).abs() < 1e-10 * a.max(1.0));
    }
}

#[test]
fn illpose_json_carries_thresholds() {
    let out = illpose(&["illpose", "--n-list", "4,16,64", "--t-star", "0.5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["lower_bound_increasing_from"].as_u64(), Some(0));
    assert_eq!(v["initial_energies"].as_array().unwrap().len(), 3);
}

#[test]
fn opcheck_passes_for_seed_seven() {
    let out = illpose(&["opcheck", "--seed", "7", "--degree", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn validation_errors_exit_one() {
    for args in [
        &["taylor", "--b", "0.5", "--mu0", "-1"][..],
        &["mode", "--n", "1", "--t-end", "1"],
        &["mode", "--n", "4", "--b", "1.5", "--t-end", "1"],
        &["growth", "--n-list", "4", "--t-end", "-1"],
        &["opcheck", "--degree", "0"],
        &["taylor", "--b", "0.5", "--unknown", "1"],
        &["nonsense"],
    ] {
        let out = illpose(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(illpose(&["--help"]).status.code(), Some(0));
    assert_eq!(illpose(&["growth", "--help"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = illpose(&["taylor", "--b", "0.5", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("steady.json");
    let args = ["steady", "--b", "0.3", "--format", "json"];
    let to_file = illpose(&[&args[..], &["--output", path.to_str().unwrap()]].concat());
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), illpose(&args).stdout);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nb = 0.5\nmu0 = 2\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let out = illpose(&["taylor", "--config", cfg]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["taylor_sign"].as_f64(), Some(0.875));

    let out = illpose(&["taylor", "--config", cfg, "--mu0", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["taylor_sign"].as_f64(), Some(0.75));
}

#[test]
fn malformed_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "b 0.5\n").unwrap();
    let out = illpose(&["taylor", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["growth", "--n-list", "4,16,64", "--t-end", "1", "--samples", "5"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_illpose")).args(args).env("ILLPOSE_THREADS", threads).output().unwrap()
    };
    assert_eq!(run("1").stdout, run("4").stdout);
    assert_eq!(run("zero").status.code(), Some(1));
}
