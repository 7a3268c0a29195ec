//! End-to-end execution of one scenario: build the initial state, integrate,
//! classify, and write the requested outputs.

use std::path::Path;
use std::time::Instant;

use vortexlab::analysis::{
    classification, conservation_drift, separation_exponent, ClassificationReport, Quantity,
    RELATIVE_EQUILIBRIUM_DRIFT,
};
use vortexlab::integrators::{integrate, RunStatus};
use vortexlab::models::VortexState;
use vortexlab::{rng, Trajectory};

use crate::outputs::{classification_json, conserved_csv, slug, trajectory_csv, write_atomic};
use crate::render::{render_figure, FigureMeta};
use crate::scenario::{build_initial_state, from_core, CliError, OutputKind, ScenarioSpec};

/// Perturbation size and rescaling interval of the separation-exponent run
/// that backs the verdict.
const LAMBDA_DELTA0: f64 = 1e-8;
const LAMBDA_RENORM_INTERVAL: f64 = 1.0;
/// Exponent runs use at least this horizon regardless of the scenario's:
/// the finite-time estimate on a regular orbit decays like log(c t)/t and
/// only drops below the quasi-periodic threshold for long windows.
const LAMBDA_MIN_HORIZON: f64 = 1000.0;

pub struct RunReport {
    pub name: String,
    pub status: RunStatus<f64>,
    pub classification: ClassificationReport<f64>,
    pub energy_rel_drift: f64,
    pub momentum_drift: f64,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Completed => 0,
            RunStatus::SolverDiverged { .. } => 2,
            RunStatus::Collision { .. } => 3,
        }
    }

    pub fn summary_line(&self) -> String {
        let status = match self.status {
            RunStatus::Completed => "completed".to_string(),
            RunStatus::Collision { t } => format!("collision at t={t:.3}"),
            RunStatus::SolverDiverged { t } => format!("solver diverged at t={t:.3}"),
        };
        let lambda = self
            .classification
            .lambda
            .map(|l| format!("{l:.4}"))
            .unwrap_or_else(|| "-".into());
        format!(
            "{}: verdict={} status={} H-drift={:.2e} J-drift={:.2e} lambda={} wall={:.2}s",
            self.name,
            self.classification.verdict,
            status,
            self.energy_rel_drift,
            self.momentum_drift,
            lambda,
            self.wall_seconds
        )
    }
}

/// Run `spec` from its own sampled/explicit initial state.
pub fn execute(spec: &ScenarioSpec, out_dir: &Path) -> Result<RunReport, CliError> {
    let state = build_initial_state(spec)?;
    execute_with_state(spec, &state, out_dir)
}

/// Run `spec` from a caller-provided initial state (the gallery uses this
/// for its closed-form hyperbolic panels).
pub fn execute_with_state(
    spec: &ScenarioSpec,
    state: &VortexState<f64>,
    out_dir: &Path,
) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let trajectory = integrate(state, &spec.integrator, Some(&spec.kernel)).map_err(from_core)?;

    // The exponent run doubles the cost, so it only happens when the verdict
    // is still undecided after the drift measurements.
    let preliminary = classification(&trajectory, None);
    let lambda = if trajectory.status.is_completed()
        && preliminary.pairwise_drift > RELATIVE_EQUILIBRIUM_DRIFT
    {
        let mut rand = rng::stream(spec.seed, rng::streams::PERTURBATION);
        let mut lambda_spec = spec.integrator;
        lambda_spec.t_final = lambda_spec.t_final.max(LAMBDA_MIN_HORIZON);
        separation_exponent(
            state,
            &lambda_spec,
            Some(&spec.kernel),
            LAMBDA_DELTA0,
            LAMBDA_RENORM_INTERVAL,
            &mut rand,
        )
        .ok()
    } else {
        None
    };
    let report = classification(&trajectory, lambda);

    let energy = conservation_drift(&trajectory, Quantity::Energy);
    let momentum_drift = momentum_drift(&trajectory);

    let base = slug(&spec.name);
    for output in &spec.outputs {
        match output {
            OutputKind::TrajectoryCsv => {
                let path = out_dir.join(format!("{base}_trajectory.csv"));
                write_atomic(&path, &trajectory_csv(&trajectory))?;
            }
            OutputKind::ConservedCsv => {
                let path = out_dir.join(format!("{base}_conserved.csv"));
                write_atomic(&path, &conserved_csv(&trajectory))?;
            }
            OutputKind::ClassificationJson => {
                let path = out_dir.join(format!("{base}_classification.json"));
                write_atomic(&path, &classification_json(spec, &trajectory, &report))?;
            }
            OutputKind::FigureSvg => {
                let path = out_dir.join(format!("{base}.svg"));
                let meta = FigureMeta {
                    title: &spec.name,
                    scenario: &spec.name,
                    seed: spec.seed,
                    dt: spec.integrator.dt,
                    t_final: spec.integrator.t_final,
                    strengths: state.strengths(),
                    verdict: Some(report.verdict.name()),
                };
                write_atomic(&path, &render_figure(&trajectory, &meta))?;
            }
        }
    }

    Ok(RunReport {
        name: spec.name.clone(),
        status: trajectory.status,
        classification: report,
        energy_rel_drift: energy.max_rel_drift,
        momentum_drift,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Worst absolute drift over the momentum components.
fn momentum_drift(trajectory: &Trajectory<f64>) -> f64 {
    let count = trajectory.diagnostics[0].momentum.components().len();
    (0..count)
        .map(|k| conservation_drift(trajectory, Quantity::Momentum(k)).max_abs_drift)
        .fold(0.0, f64::max)
}
