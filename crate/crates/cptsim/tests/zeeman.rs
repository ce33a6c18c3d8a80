//! Field sweeps through the `zeeman` command: dip positions and population trapping.

use std::fs;
use std::path::Path;
use std::process::Command;

use serde::Deserialize;
use serde_json::{json, Value};
use tempfile::TempDir;

#[derive(Debug, Deserialize)]
struct DipRow {
    b_gauss: f64,
    predicted_low_hz: f64,
    predicted_high_hz: f64,
    simulated_low_hz: f64,
    simulated_high_hz: f64,
    off_dip_intensity: f64,
}

fn manifest(delta_pm_hz: f64, grid: Value, fields: &[f64]) -> Value {
    json!({
        "experiment": {
            "levels": {"delta_pm_hz": delta_pm_hz},
            "laser_on": "ms1",
            "power_w": 1.5e-6,
            "sideband_rel": 0.5,
            "rabi_hz_per_sqrt_w": 20e6 / 1.224744871391589e-3,
            "relax": {"branching": 0.8, "gamma4_hz": 23e6, "gamma1_hz": 1.2e6}
        },
        "grid": grid,
        "fields_gauss": fields
    })
}

fn run_zeeman(dir: &Path, m: &Value) -> Vec<DipRow> {
    let path = dir.join("zeeman.json");
    fs::write(&path, m.to_string()).unwrap();
    let out = dir.join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_cptsim"))
        .args(["zeeman", "--manifest", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    csv::Reader::from_path(out.join("dips.csv"))
        .unwrap()
        .deserialize()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn dips_follow_prediction_and_separate_with_field() {
    let tmp = TempDir::new().unwrap();
    let grid = json!({"start_hz": 2.80e9, "stop_hz": 2.96e9, "points": 321});
    let step = 0.5e6;
    let rows = run_zeeman(tmp.path(), &manifest(0.0, grid, &[0.0, 4.0, 10.0, 17.0]));
    for r in &rows {
        assert!((r.simulated_low_hz - r.predicted_low_hz).abs() <= step, "{r:?}");
        assert!((r.simulated_high_hz - r.predicted_high_hz).abs() <= step, "{r:?}");
    }
    let separations: Vec<f64> = rows.iter().map(|r| r.simulated_high_hz - r.simulated_low_hz).collect();
    assert!(separations.windows(2).all(|w| w[1] > w[0]), "{separations:?}");
}

#[test]
fn zero_field_gives_a_merged_dip_at_the_zero_field_splitting() {
    let tmp = TempDir::new().unwrap();
    let grid = json!({"start_hz": 2.86e9, "stop_hz": 2.90e9, "points": 161});
    let rows = run_zeeman(tmp.path(), &manifest(0.0, grid.clone(), &[0.0]));
    assert_eq!(rows[0].simulated_low_hz, 2.88e9);
    assert_eq!(rows[0].simulated_high_hz, 2.88e9);

    let tmp = TempDir::new().unwrap();
    let rows = run_zeeman(tmp.path(), &manifest(5e6, grid, &[0.0]));
    assert!((rows[0].simulated_low_hz - 2.8775e9).abs() <= 0.25e6, "{:?}", rows[0]);
    assert!((rows[0].simulated_high_hz - 2.8825e9).abs() <= 0.25e6, "{:?}", rows[0]);
}

#[test]
fn strong_field_traps_population_in_the_undriven_level() {
    let tmp = TempDir::new().unwrap();
    let grid = json!({"start_hz": 2.2e9, "stop_hz": 3.56e9, "points": 681});
    let rows = run_zeeman(tmp.path(), &manifest(5e6, grid, &[0.0, 200.0]));
    assert_eq!(rows[1].b_gauss, 200.0);
    assert!(
        rows[1].off_dip_intensity < rows[0].off_dip_intensity,
        "{} at 200 G vs {} at 0 G",
        rows[1].off_dip_intensity,
        rows[0].off_dip_intensity
    );
}
