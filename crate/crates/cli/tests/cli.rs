//! End-to-end command tests against generated fixtures in temp dirs, plus
//! process-level exit-code and determinism checks on the sample dataset.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

use interarb::synth;
use interarb_cli::commands::{cmd_solve, cmd_sweep, CmdError, SweepAxis};
use interarb_cli::config::StudyConfig;

fn write_series(path: &Path, values: &[f64]) {
    let mut out = String::from("timestamp,value\n");
    for (h, v) in values.iter().enumerate() {
        let day = 1 + h / 24;
        let hod = h % 24;
        let _ = writeln!(out, "2021-03-{day:02}T{hod:02}:00:00Z,{v}");
    }
    std::fs::write(path, out).unwrap();
}

fn battery_toml() -> &'static str {
    "cost_per_kwh = 100.0\nrated_capacity_mwh = 1.0\nmin_capacity_mwh = 0.1\n\
     max_rate_mw = 0.5\nmin_rate_mw = -0.5\ncharging_efficiency = 0.95\n\
     discharging_efficiency = 0.95\nconverter_efficiency = 0.95\n\
     initial_charge_mwh = 0.5\ncycle_life_100dod = 7200\ncalendar_life_years = 10\n"
}

/// Writes a complete small study (days of synthetic data) into `dir` and
/// returns the config path.
fn fixture(dir: &Path, days: usize, scenario: &str, rent: f64, flows: Option<&[f64]>) -> PathBuf {
    let (price_a, price_b) = synth::price_pair(days, 11);
    write_series(&dir.join("a.csv"), &price_a);
    write_series(&dir.join("b.csv"), &price_b);
    std::fs::write(dir.join("battery.toml"), battery_toml()).unwrap();
    let flows_line = match flows {
        Some(values) => {
            write_series(&dir.join("flows.csv"), values);
            "flows = \"flows.csv\"\n"
        }
        None => "",
    };
    let config = format!(
        "battery = \"battery.toml\"\n\n[data]\nprice_a = \"a.csv\"\nprice_b = \"b.csv\"\n{flows_line}\n\
         [market]\nrent_eur_per_mwh = {rent}\nline_efficiency = 0.975\nline_capacity_mw = 1000.0\n\n\
         [study]\nscenario = \"{scenario}\"\n\n[output]\ndir = \"out\"\n"
    );
    let path = dir.join("study.toml");
    std::fs::write(&path, config).unwrap();
    path
}

fn load(path: &Path) -> StudyConfig {
    StudyConfig::load(path).unwrap()
}

#[test]
fn solve_smoke_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path(), 1, "C1", 5.0, None);
    cmd_solve(&config, load(&config)).unwrap();
    let out = dir.path().join("out");
    for file in ["trajectory.csv", "metrics.json", "solver.log"] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["config_hash"].as_str().unwrap().len() == 16);
    assert!(metrics["revenue_eur"].as_f64().unwrap().is_finite());
    let trajectory = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(trajectory.starts_with("# config_hash="));
    assert_eq!(trajectory.lines().count(), 2 + 24); // hash + header + rows
}

#[test]
fn saturated_envelope_matches_local_only() {
    // Flow pinned at the line limit blocks all discharge toward grid B and
    // grid-B energy is never worth buying, so C3 collapses onto C1.
    let dir = tempfile::tempdir().unwrap();
    let days = 2;
    let flows = synth::saturated_flows(days, 1000.0);
    let config = fixture(dir.path(), days, "C3", 5.0, Some(&flows));
    cmd_solve(&config, load(&config)).unwrap();
    let read_obj = |out: &Path| -> f64 {
        let metrics: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap())
                .unwrap();
        metrics["objective_eur"].as_f64().unwrap()
    };
    let c3 = read_obj(&dir.path().join("out"));

    let mut cfg = load(&config);
    cfg.scenario = "C1".parse().unwrap();
    cfg.file.output.dir = "out-c1".to_string();
    cmd_solve(&config, cfg).unwrap();
    let c1 = read_obj(&dir.path().join("out-c1"));
    assert!((c3 - c1).abs() < 1e-6, "C3 {c3} vs C1 {c1}");
    // The C3 run also documents its envelope.
    assert!(dir.path().join("out/envelope.csv").exists());
}

#[test]
fn baseline_never_beats_full_availability() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path(), 3, "K1", 5.0, None);
    cmd_solve(&config, load(&config)).unwrap();
    let read_rev = |out: &Path| -> f64 {
        let metrics: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap())
                .unwrap();
        metrics["revenue_eur"].as_f64().unwrap()
    };
    let k1 = read_rev(&dir.path().join("out"));
    let mut cfg = load(&config);
    cfg.scenario = "C2".parse().unwrap();
    cfg.file.output.dir = "out-c2".to_string();
    cmd_solve(&config, cfg).unwrap();
    let c2 = read_rev(&dir.path().join("out-c2"));
    assert!(k1 <= c2 + 1e-6, "K1 {k1} vs C2 {c2}");
}

#[test]
fn rent_sweep_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path(), 1, "C2", 0.0, None);
    let axis = SweepAxis::from_args(Some(0.0), Some(30.0), Some(1.0), None).unwrap();
    assert_eq!(axis.values.len(), 31);
    cmd_sweep(load(&config), "rent", axis).unwrap();
    let text = std::fs::read_to_string(dir.path().join("out/rent_sweep.csv")).unwrap();
    // hash + header + 31 points
    assert_eq!(text.lines().count(), 33);
    assert!(dir.path().join("out/rent_sweep_long.csv").exists());
}

#[test]
fn blocking_sweep_emits_selections() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path(), 1, "C2", 5.0, None);
    let axis = SweepAxis::from_args(None, None, None, Some("0,0.2,0.4,0.6".to_string())).unwrap();
    cmd_sweep(load(&config), "blocking", axis).unwrap();
    let selection: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/blocking_selection.json")).unwrap(),
    )
    .unwrap();
    assert!(selection["m1_knee"]["b_block"].is_number());
    assert!(selection["m2_calendar"]["b_block"].is_number());
}

#[test]
fn reserved_sweep_is_monotone_in_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let days = 2;
    let flows = synth::saturated_flows(days, 1000.0);
    let config = fixture(dir.path(), days, "C3", 5.0, Some(&flows));
    let axis =
        SweepAxis::from_args(None, None, None, Some("0,0.25,0.5,0.75,1".to_string())).unwrap();
    cmd_sweep(load(&config), "reserved", axis).unwrap();
    let text = std::fs::read_to_string(dir.path().join("out/reserved_sweep.csv")).unwrap();
    let revenues: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(revenues.len(), 5);
    for pair in revenues.windows(2) {
        assert!(
            pair[1] >= pair[0] - 1e-6,
            "revenue not monotone: {revenues:?}"
        );
    }
}

#[test]
fn unknown_sweep_kind_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture(dir.path(), 1, "C2", 5.0, None);
    let axis = SweepAxis::from_args(None, None, None, Some("0,1".to_string())).unwrap();
    let err = cmd_sweep(load(&config), "frequency", axis).unwrap_err();
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn exit_codes_follow_the_contract() {
    assert_eq!(CmdError::Infeasible(String::new()).exit_code(), 2);
    assert_eq!(CmdError::Limit(String::new()).exit_code(), 3);
    assert_eq!(CmdError::Other(anyhow::anyhow!("x")).exit_code(), 4);
}

fn run_binary(args: &[&str], envs: &[(&str, &str)]) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_interarb"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

#[test]
fn binary_reports_config_errors_with_exit_4() {
    let out = run_binary(&["solve", "--config", "/nonexistent/study.toml"], &[]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn binary_solves_the_bundled_sample_deterministically() {
    let sample = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../sample");
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out in [&out1, &out2] {
        let result = run_binary(
            &[
                "solve",
                "--config",
                sample.join("study.toml").to_str().unwrap(),
                "--scenario",
                "C1",
                "--end",
                "2019-01-03",
                "--out",
                out.to_str().unwrap(),
            ],
            &[],
        );
        assert!(
            result.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&result.stderr)
        );
    }
    // Result artifacts are byte-reproducible; the solver log is diagnostic
    // and carries wall-clock times.
    for file in ["trajectory.csv", "metrics.json"] {
        let a = std::fs::read(out1.join(file)).unwrap();
        let b = std::fs::read(out2.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    assert!(out1.join("solver.log").exists());
}

#[test]
fn dispatch_round_trips_into_a_c3_solve() {
    // Clear the market on generated case data, then feed a produced flow
    // series back into a flows-file C3 study.
    let dir = tempfile::tempdir().unwrap();
    let days = 1;
    let (price_a, price_b) = synth::price_pair(days, 3);
    write_series(&dir.path().join("a.csv"), &price_a);
    write_series(&dir.path().join("b.csv"), &price_b);
    let demand: Vec<f64> = (0..24).map(|h| 8000.0 + 50.0 * h as f64).collect();
    let wind: Vec<f64> = (0..24).map(|h| 1200.0 + 40.0 * h as f64).collect();
    write_series(&dir.path().join("da.csv"), &demand);
    write_series(&dir.path().join("db.csv"), &demand);
    write_series(&dir.path().join("wind.csv"), &wind);
    std::fs::write(dir.path().join("battery.toml"), battery_toml()).unwrap();
    std::fs::write(
        dir.path().join("case.toml"),
        "battery = \"battery.toml\"\n\n[data]\nprice_a = \"a.csv\"\nprice_b = \"b.csv\"\n\n\
         [study]\nscenario = \"C3\"\nenvelope_source = \"dispatch-sim\"\n\n\
         [dispatch]\ndemand_a = \"da.csv\"\ndemand_b = \"db.csv\"\nwind = \"wind.csv\"\n\n\
         [output]\ndir = \"out\"\n",
    )
    .unwrap();
    let case_config = dir.path().join("case.toml");
    interarb_cli::commands::cmd_dispatch(load(&case_config)).unwrap();
    let flows = dir.path().join("out/flows_nautilus-uk.csv");
    assert!(flows.exists());

    std::fs::write(
        dir.path().join("follow.toml"),
        "battery = \"battery.toml\"\n\n[data]\nprice_a = \"a.csv\"\nprice_b = \"b.csv\"\n\
         flows = \"out/flows_nautilus-uk.csv\"\n\n[market]\nline_capacity_mw = 1400.0\n\n\
         [study]\nscenario = \"C3\"\n\n[output]\ndir = \"out-solve\"\n",
    )
    .unwrap();
    let follow = dir.path().join("follow.toml");
    cmd_solve(&follow, load(&follow)).unwrap();
    assert!(dir.path().join("out-solve/metrics.json").exists());

    // The dispatch-sim study itself also solves end to end.
    cmd_solve(&case_config, load(&case_config)).unwrap();
}

#[test]
fn data_dir_env_var_resolves_relative_paths() {
    // Config in one directory, data in another, wired by the environment.
    let config_dir = tempfile::tempdir().unwrap();
    let data_dir = tempfile::tempdir().unwrap();
    let (price_a, price_b) = synth::price_pair(1, 21);
    write_series(&data_dir.path().join("a.csv"), &price_a);
    write_series(&data_dir.path().join("b.csv"), &price_b);
    std::fs::write(data_dir.path().join("battery.toml"), battery_toml()).unwrap();
    std::fs::write(
        config_dir.path().join("study.toml"),
        "battery = \"battery.toml\"\n\n[data]\nprice_a = \"a.csv\"\nprice_b = \"b.csv\"\n\n\
         [study]\nscenario = \"C1\"\n\n[output]\ndir = \"out\"\n",
    )
    .unwrap();
    let out = run_binary(
        &[
            "solve",
            "--config",
            config_dir.path().join("study.toml").to_str().unwrap(),
        ],
        &[(
            interarb_cli::DATA_DIR_ENV,
            data_dir.path().to_str().unwrap(),
        )],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(data_dir.path().join("out/metrics.json").exists());
}
