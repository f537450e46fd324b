//! CSV schemas. Floats are written with 17 significant digits.

use std::fs;
use std::path::Path;

use bimodal_core::dynamics::EchoResult;
use bimodal_core::effective::{DriveAnalysis, DriveParams};
use bimodal_core::spectrum::{GridCell, PhaseGrid};

use crate::error::CliError;

pub const GRID_HEADER: [&str; 12] = [
    "axis1_name",
    "axis1_value",
    "axis2_name",
    "axis2_value",
    "energy",
    "n_label",
    "m_label",
    "category",
    "gap",
    "window_capped",
    "rwa_ok",
    "hierarchy_ok",
];

pub const ECHO_HEADER: [&str; 5] = ["t", "fidelity", "norm_a", "norm_b", "leakage"];

pub const EFFECTIVE_HEADER: [&str; 15] = [
    "omega_D",
    "theta",
    "n0",
    "m0",
    "Delta_n0",
    "Delta_m0",
    "Omega1_eff",
    "Omega2_eff",
    "omega1_eff",
    "omega2_eff",
    "gr1",
    "gr2",
    "gc1",
    "gc2",
    "rwa_ok",
];

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn grid_record(axis1: (&str, f64), axis2: (&str, f64), cell: &GridCell) -> Vec<String> {
    let p = &cell.point;
    // Static cells carry no drive, so both validity flags hold trivially.
    let (rwa, hier) = cell.validity.map_or((true, true), |v| (v.rwa_ok, v.hierarchy_ok));
    vec![
        axis1.0.to_string(),
        num(axis1.1),
        axis2.0.to_string(),
        num(axis2.1),
        num(p.energy),
        p.label.0.to_string(),
        p.label.1.to_string(),
        p.category.as_str().to_string(),
        num(p.gap),
        cell.window_capped.to_string(),
        rwa.to_string(),
        hier.to_string(),
    ]
}

pub fn echo_records(echo: &EchoResult) -> Vec<Vec<String>> {
    (0..echo.times.len())
        .map(|i| {
            vec![
                num(echo.times[i]),
                num(echo.fidelity[i]),
                num(echo.norm_a[i]),
                num(echo.norm_b[i]),
                num(echo.leakage[i]),
            ]
        })
        .collect()
}

pub fn effective_record(drive: &DriveParams, a: &DriveAnalysis) -> Vec<String> {
    let (sb, e) = (&a.sidebands, &a.effective);
    vec![
        num(drive.frequency),
        num(drive.theta()),
        sb.n0.to_string(),
        sb.m0.to_string(),
        num(sb.delta_n0),
        num(sb.delta_m0),
        num(e.cavity1),
        num(e.cavity2),
        num(e.omega1),
        num(e.omega2),
        num(e.gr1),
        num(e.gr2),
        num(e.gc1),
        num(e.gc2),
        a.validity.rwa_ok.to_string(),
    ]
}

/// Writes through a temporary file so a crash never leaves a truncated CSV.
pub fn write_csv<R: AsRef<[String]>>(path: &Path, header: &[&str], rows: &[R]) -> Result<(), CliError> {
    let tmp = path.with_extension("csv.tmp");
    let io = |e: csv::Error| CliError::Runtime(format!("{}: {e}", tmp.display()));
    let mut w = csv::Writer::from_path(&tmp).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.as_ref()).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(&tmp, e))?;
    drop(w);
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn write_grid_csv(grid: &PhaseGrid, path: &Path) -> Result<(), CliError> {
    let cols = grid.axis2.values.len();
    let rows: Vec<Vec<String>> = grid
        .cells
        .iter()
        .enumerate()
        .map(|(k, cell)| {
            let a1 = (grid.axis1.name.as_str(), grid.axis1.values[k / cols]);
            let a2 = (grid.axis2.name.as_str(), grid.axis2.values[k % cols]);
            grid_record(a1, a2, cell)
        })
        .collect();
    write_csv(path, &GRID_HEADER, &rows)
}

pub fn write_echo_csv(echo: &EchoResult, path: &Path) -> Result<(), CliError> {
    write_csv(path, &ECHO_HEADER, &echo_records(echo))
}
