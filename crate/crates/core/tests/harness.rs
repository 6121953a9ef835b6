use std::fs;
use std::path::Path;

use msdg::harness::{
    compute_order, preset, preset_names, presets, run_convergence, run_simulation, Cells, ExperimentConfig,
    PresetKind,
};
use msdg::parallel::Execution;
use msdg::Error;

fn wave_config(cells: &str, t_end: f64, extra: &str) -> String {
    format!(
        r#"{{
  "name": "small",
  "model": {{"model": "wave"}},
  "mesh": {{"domain": [0.0, 6.283185307179586], "cells": {cells}}},
  "k": 2,
  "time": {{"method": {{"kind": "rk"}}, "dt": {{"ratio": 0.1}}, "t_end": {t_end}}},
  "initial": {{"kind": "exp_sine"}}{extra}
}}"#
    )
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn order_examples() {
    let o = compute_order(&[1e-2, 2.5e-3, 6.25e-4], &[10, 20, 40]).unwrap();
    assert!(o.iter().all(|v| (v - 2.0).abs() < 1e-12));
    let o = compute_order(&[8e-3, 1e-3], &[10, 20]).unwrap();
    assert!((o[0] - 3.0).abs() < 1e-12);
    // non-doubling refinements
    let o = compute_order(&[1.0, 1.0 / 9.0], &[41, 123]).unwrap();
    assert!((o[0] - 2.0).abs() < 1e-12);
    assert_eq!(compute_order(&[3e-4, 3e-4], &[10, 20]).unwrap(), vec![0.0]);
    assert!(compute_order(&[1.0], &[10]).is_err());
    assert!(compute_order(&[1.0, 0.5], &[10]).is_err());
    assert!(compute_order(&[1.0, 0.0], &[10, 20]).is_err());
    assert!(compute_order(&[1.0, f64::NAN], &[10, 20]).is_err());
    assert!(compute_order(&[1.0, 0.5], &[10, 10]).is_err());
}

#[test]
fn config_json_roundtrip() {
    let cfg = ExperimentConfig::from_json(&wave_config("[8, 16]", 0.5, "")).unwrap();
    assert_eq!(cfg.mesh.cells, Cells::List(vec![8, 16]));
    assert_eq!(cfg.observe.points_per_cell, 10);
    let again = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
    assert_eq!(cfg, again);
    let single = ExperimentConfig::from_json(&wave_config("12", 0.5, "")).unwrap();
    assert_eq!(single.cells(), vec![12]);
}

#[test]
fn invalid_configs_are_rejected() {
    let cases = [
        wave_config("[]", 1.0, ""),
        wave_config("[8]", -1.0, ""),
        wave_config("[8]", 1.0, r#", "colour": "red""#),
        wave_config("[8]", 1.0, r#", "observe": {"snapshots": [2.0]}"#),
        wave_config("[8]", 1.0, r#", "observe": {"points_per_cell": 3}"#),
        wave_config("[8]", 1.0, r#", "k": 11"#).replacen(r#""k": 2,"#, "", 1),
        r#"{"model": {"model": "heat"}}"#.to_string(),
        "not json".to_string(),
    ];
    for c in cases {
        let err = ExperimentConfig::from_json(&c).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)), "{c}: {err}");
    }
    let cfg = ExperimentConfig::from_json(&wave_config("[16, 8]", 0.1, "")).unwrap();
    assert!(matches!(run_convergence(&cfg), Err(Error::InvalidConfig(_))));
    // flux scalars the model does not use are caught when the scheme is built
    let cfg = ExperimentConfig::from_json(&wave_config("[8, 16]", 0.1, r#", "flux": {"alpha0": 1.0}"#)).unwrap();
    assert!(matches!(run_convergence(&cfg), Err(Error::InvalidConfig(_))));
    let cfg = ExperimentConfig::from_json(&wave_config("[8, 16]", 0.1, "")).unwrap();
    assert!(matches!(run_simulation(&cfg), Err(Error::InvalidConfig(_))));
}

#[test]
fn presets_are_valid_and_named_uniquely() {
    let names = preset_names();
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), names.len());
    for p in presets() {
        assert_eq!(p.config.name, p.name);
        p.config.validate().unwrap();
        let parsed = ExperimentConfig::from_json(&p.config.to_json().unwrap()).unwrap();
        assert_eq!(parsed, p.config);
        match p.kind {
            PresetKind::Convergence => assert!(p.config.cells().len() >= 2, "{}", p.name),
            PresetKind::Simulation => assert_eq!(p.config.cells().len(), 1, "{}", p.name),
        }
    }
    assert!(preset("no_such_preset").is_err());
}

#[test]
fn convergence_csv_schema_and_rates() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_json(&wave_config("[10, 20, 40]", 0.5, "")).unwrap();
    cfg.output_dir = Some(dir.path().to_path_buf());
    let table = run_convergence(&cfg).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(!table.any_diverged());
    assert!(table.rows[0].order_u.is_none());
    let o = table.last_order_u().unwrap();
    assert!((o - 3.0).abs() < 0.3, "{o}");
    let text = read(dir.path(), "convergence.csv");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,err_u,order_u,err_aux,order_aux");
    assert_eq!(lines.len(), 4);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "10");
    assert_eq!(first[2], "");
    assert!(first[1].parse::<f64>().unwrap() > 0.0);
    let last: Vec<&str> = lines[3].split(',').collect();
    assert!((last[2].parse::<f64>().unwrap() - o).abs() < 1e-6);
}

#[test]
fn diverged_rows_are_marked() {
    let bad = wave_config("[6, 12]", 400.0, "")
        .replace(r#"{"ratio": 0.1}"#, r#"{"ratio": 3.0}"#)
        .replace(r#"{"kind": "rk"}"#, r#"{"kind": "rk", "order": 1}"#);
    let cfg = ExperimentConfig::from_json(&bad).unwrap();
    let table = run_convergence(&cfg).unwrap();
    assert!(table.any_diverged());
    let dir = tempfile::tempdir().unwrap();
    table.write_csv(&dir.path().join("c.csv")).unwrap();
    let text = read(dir.path(), "c.csv");
    assert!(text.lines().skip(1).any(|l| l.split(',').nth(1) == Some("NaN")), "{text}");
    let sim = ExperimentConfig::from_json(&bad.replace("[6, 12]", "12")).unwrap();
    let report = run_simulation(&sim).unwrap();
    assert!(report.blow_up.is_some());
    assert!(report.final_time < 400.0);
    assert!(!report.energy.is_empty());
}

#[test]
fn simulation_outputs_follow_schema() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_json(&wave_config(
        "12",
        1.0,
        r#", "observe": {"stride": 5, "snapshots": [0.0, 0.5]}"#,
    ))
    .unwrap();
    cfg.output_dir = Some(dir.path().to_path_buf());
    let report = run_simulation(&cfg).unwrap();
    assert_eq!(report.final_time, 1.0);
    assert!(report.blow_up.is_none());
    assert_eq!(report.snapshots.len(), 3);
    assert_eq!(report.snapshots[2].t, 1.0);
    assert!(report.max_energy_drift() < 1e-3, "{}", report.max_energy_drift());

    let energy = read(dir.path(), "energy.csv");
    assert_eq!(energy.lines().next(), Some("t,E_h,delta_E_h"));
    let first: Vec<f64> = energy.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[2], 0.0);
    assert_eq!(read(dir.path(), "error.csv").lines().next(), Some("t,l2_error"));
    let index = read(dir.path(), "snapshots.csv");
    let rows: Vec<&str> = index.lines().collect();
    assert_eq!(rows[0], "index,t,file");
    assert_eq!(rows.len(), 4);
    assert!(rows[3].ends_with("snapshot_002.csv"));
    let snap = read(dir.path(), "snapshot_001.csv");
    assert_eq!(snap.lines().next(), Some("x,u,aux,u_exact"));
    assert_eq!(snap.lines().count(), 1 + 12 * 10);
}

#[test]
fn nls_energy_csv_has_charge_column() {
    let mut cfg = preset("nls_plane_wave").unwrap();
    cfg.time.t_end = 0.01;
    cfg.observe.snapshots.clear();
    let dir = tempfile::tempdir().unwrap();
    cfg.output_dir = Some(dir.path().to_path_buf());
    let report = run_simulation(&cfg).unwrap();
    assert!(report.max_charge_drift().unwrap() < 1e-12);
    assert_eq!(read(dir.path(), "energy.csv").lines().next(), Some("t,E_h,delta_E_h,charge"));
}

#[test]
fn outputs_are_reproducible_across_execution_modes() {
    let mut out = Vec::new();
    for exec in [Execution::Sequential, Execution::Parallel, Execution::Parallel] {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::from_json(&wave_config("[8, 16]", 0.3, r#", "mesh": {"domain": [0.0, 6.283185307179586], "cells": [8, 16], "jitter": 0.2}"#).replacen(r#""mesh": {"domain": [0.0, 6.283185307179586], "cells": [8, 16]},"#, "", 1)).unwrap();
        cfg.seed = 42;
        cfg.execution = exec;
        cfg.output_dir = Some(dir.path().to_path_buf());
        run_convergence(&cfg).unwrap();
        out.push(read(dir.path(), "convergence.csv"));
    }
    assert_eq!(out[0], out[1]);
    assert_eq!(out[1], out[2]);
}

#[test]
fn shipped_configs_match_presets() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in preset_names() {
        let cfg = ExperimentConfig::from_path(&dir.join(format!("{name}.json"))).unwrap();
        assert_eq!(cfg, preset(name).unwrap(), "{name}");
    }
}
