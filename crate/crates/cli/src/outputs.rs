//! File outputs: trajectory and conserved-quantity CSVs, classification
//! JSON, and atomic whole-file writes.
//!
//! Floats are written with 17 significant digits so the CSVs round-trip
//! losslessly and diff cleanly; lines end with LF.

use std::fs;
use std::path::Path;

use serde_json::json;
use vortexlab::analysis::{
    drift_summary, ClassificationReport, CHAOTIC_LAMBDA, CLASSIFIER_VERSION,
    EQUILIBRIUM_DISPLACEMENT, QUASI_PERIODIC_LAMBDA, RELATIVE_EQUILIBRIUM_DRIFT,
};
use vortexlab::geometry::Coords;
use vortexlab::integrators::RunStatus;
use vortexlab::Trajectory;

use crate::scenario::{CliError, ScenarioSpec};

/// `{:.16e}` carries one leading digit plus 16 decimals: 17 significant
/// digits, enough to reproduce any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write via a temporary sibling then rename, so readers never observe a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.tmp-{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    fs::write(&tmp, contents.as_bytes())?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// `t,x1,y1[,z1],...` per sample. Torus samples are canonicalized into
/// `[0, 2pi)^2`; all other geometries report embedding coordinates as-is.
pub fn trajectory_csv(trajectory: &Trajectory<f64>) -> String {
    let geometry = trajectory.states[0].geometry();
    let n = trajectory.states[0].n();
    let mut out = String::from("t");
    for i in 1..=n {
        if geometry.is_spatial() {
            out.push_str(&format!(",x{i},y{i},z{i}"));
        } else {
            out.push_str(&format!(",x{i},y{i}"));
        }
    }
    out.push('\n');
    for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
        out.push_str(&fmt_float(*t));
        match state.positions().canonicalized(geometry) {
            Coords::Spatial(pts) => {
                for p in pts {
                    out.push_str(&format!(
                        ",{},{},{}",
                        fmt_float(p.x),
                        fmt_float(p.y),
                        fmt_float(p.z)
                    ));
                }
            }
            Coords::Planar(pts) => {
                for p in pts {
                    out.push_str(&format!(",{},{}", fmt_float(p.x), fmt_float(p.y)));
                }
            }
        }
        out.push('\n');
    }
    out
}

/// `t,H,<momentum components>,circulation` per sample. Torus momentum is the
/// lift value (not canonicalized).
pub fn conserved_csv(trajectory: &Trajectory<f64>) -> String {
    let mut out = String::from("t,H");
    for (name, _) in trajectory.diagnostics[0].momentum.components() {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",circulation\n");
    for (t, diag) in trajectory.times.iter().zip(&trajectory.diagnostics) {
        out.push_str(&fmt_float(*t));
        out.push(',');
        out.push_str(&fmt_float(diag.energy));
        for (_, value) in diag.momentum.components() {
            out.push(',');
            out.push_str(&fmt_float(value));
        }
        out.push(',');
        out.push_str(&fmt_float(diag.circulation));
        out.push('\n');
    }
    out
}

fn status_json(status: &RunStatus<f64>) -> serde_json::Value {
    match status {
        RunStatus::Completed => json!({ "kind": "completed" }),
        RunStatus::Collision { t } => json!({ "kind": "collision", "t": t }),
        RunStatus::SolverDiverged { t } => json!({ "kind": "solver_diverged", "t": t }),
    }
}

/// Self-describing classification record: the verdict plus the thresholds it
/// was judged against.
pub fn classification_json(
    spec: &ScenarioSpec,
    trajectory: &Trajectory<f64>,
    report: &ClassificationReport<f64>,
) -> String {
    let drifts: serde_json::Map<String, serde_json::Value> = drift_summary(trajectory)
        .into_iter()
        .map(|(name, value)| (name, json!(value)))
        .collect();
    let value = json!({
        "schema": 1,
        "scenario": spec.name,
        "geometry": spec.geometry.name(),
        "n": spec.n,
        "seed": spec.seed,
        "integrator": {
            "method": spec.integrator.method.name(),
            "dt": spec.integrator.dt,
            "t_final": spec.integrator.t_final,
        },
        "status": status_json(&trajectory.status),
        "verdict": report.verdict.name(),
        "displacement": report.displacement,
        "pairwise_drift": report.pairwise_drift,
        "lambda": report.lambda,
        "max_abs_drift": drifts,
        "thresholds": {
            "classifier_version": CLASSIFIER_VERSION,
            "equilibrium_displacement": EQUILIBRIUM_DISPLACEMENT,
            "relative_equilibrium_drift": RELATIVE_EQUILIBRIUM_DRIFT,
            "quasi_periodic_lambda": QUASI_PERIODIC_LAMBDA,
            "chaotic_lambda": CHAOTIC_LAMBDA,
        },
    });
    let mut text = serde_json::to_string_pretty(&value).expect("classification serializes");
    text.push('\n');
    text
}

/// File-name-safe scenario slug.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
