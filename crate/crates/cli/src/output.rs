//! Result writers. CSV floats carry 17 significant digits so golden files
//! are exact; JSON relies on serde's shortest round-trip encoding, which is
//! also exact.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;
use stopfield::{AuditReport, PopulationResult, SolutionSet};

use crate::CliError;

/// 17 significant digits; `inf` for infinite times.
pub fn fmt(v: f64) -> String {
    if v.is_infinite() {
        return "inf".into();
    }
    format!("{v:.16e}")
}

pub const CURVE_HEADER: &str = "t,x,r,n_isolated,n_flat,rho_min,rho_max,rho_selected,residual";
pub const RESULTS_HEADER: &str = "t,rho_selected,empirical,residual";
pub const AGENTS_HEADER: &str = "agent_id,U,tau,gap";
pub const SWEEP_HEADER: &str = "value,t,rho_max,rho_min,n_solutions";

/// Per-grid-point curve data shared by the CSV and JSON writers.
pub struct CurveRows {
    pub scenario: String,
    pub policy: String,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub solutions: Vec<SolutionSet>,
    pub selected: Vec<f64>,
    pub residual: Vec<f64>,
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn write_curve_csv(path: &Path, rows: &CurveRows) -> Result<(), CliError> {
    let mut text = String::from(CURVE_HEADER);
    text.push('\n');
    for k in 0..rows.t.len() {
        let s = &rows.solutions[k];
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            fmt(rows.t[k]),
            fmt(rows.x[k]),
            fmt(rows.r[k]),
            s.isolated_roots.len(),
            s.flat_intervals.len(),
            fmt(s.minimal()),
            fmt(s.maximal()),
            fmt(rows.selected[k]),
            fmt(rows.residual[k]),
        );
    }
    write_file(path, &text)
}

pub fn write_results_csv(
    path: &Path,
    t: &[f64],
    selected: &[f64],
    empirical: &[f64],
) -> Result<(), CliError> {
    let mut text = String::from(RESULTS_HEADER);
    text.push('\n');
    for k in 0..t.len() {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            fmt(t[k]),
            fmt(selected[k]),
            fmt(empirical[k]),
            fmt((empirical[k] - selected[k]).abs()),
        );
    }
    write_file(path, &text)
}

pub fn write_agents_csv(path: &Path, result: &PopulationResult) -> Result<(), CliError> {
    let mut text = String::from(AGENTS_HEADER);
    text.push('\n');
    for i in 0..result.stopping_times.len() {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            i,
            fmt(result.uniform_draws[i]),
            fmt(result.stopping_times[i]),
            fmt(result.payoff_gaps[i]),
        );
    }
    write_file(path, &text)
}

pub fn write_solutions_json(path: &Path, rows: &CurveRows) -> Result<(), CliError> {
    let points: Vec<serde_json::Value> = (0..rows.t.len())
        .map(|k| {
            let s = &rows.solutions[k];
            json!({
                "t": rows.t[k],
                "x": rows.x[k],
                "r": rows.r[k],
                "isolated_roots": s.isolated_roots,
                "flat_intervals": s.flat_intervals,
                "minimal": s.minimal(),
                "maximal": s.maximal(),
                "selected": rows.selected[k],
                "residual": rows.residual[k],
            })
        })
        .collect();
    let doc = json!({
        "scenario": rows.scenario,
        "policy": rows.policy,
        "points": points,
    });
    write_file(
        path,
        &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()),
    )
}

pub fn write_plot_json(
    path: &Path,
    rows: &CurveRows,
    empirical: Option<&[f64]>,
) -> Result<(), CliError> {
    let rho_min: Vec<f64> = rows.solutions.iter().map(|s| s.minimal()).collect();
    let rho_max: Vec<f64> = rows.solutions.iter().map(|s| s.maximal()).collect();
    let doc = json!({
        "scenario": rows.scenario,
        "t": rows.t,
        "x": rows.x,
        "rho_selected": rows.selected,
        "rho_min": rho_min,
        "rho_max": rho_max,
        "empirical": empirical,
    });
    write_file(
        path,
        &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()),
    )
}

pub struct SweepRow {
    pub value: f64,
    pub t: f64,
    pub rho_max: f64,
    pub rho_min: f64,
    pub n_solutions: usize,
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for row in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            fmt(row.value),
            fmt(row.t),
            fmt(row.rho_max),
            fmt(row.rho_min),
            row.n_solutions,
        );
    }
    write_file(path, &text)
}

pub fn write_audit_json(path: &Path, report: &AuditReport) -> Result<(), CliError> {
    let doc = json!({
        "worst_gap": report.worst_gap,
        "worst_agent": report.worst_agent,
        "sampled": report.sampled,
    });
    write_file(
        path,
        &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()),
    )
}
