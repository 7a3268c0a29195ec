//! The gallery: one figure per regime panel, four panels per geometry.
//!
//! Panels mirror the regime matrix of the classification suite: per geometry,
//! the constrained cases that are equilibria/relative equilibria or
//! integrable, plus the unconstrained case that goes chaotic. Panels run
//! concurrently (capped by `VORTEXLAB_THREADS`) and each writes one SVG.

use std::path::Path;
use std::thread;

use vortexlab::conserved::hyperbolic_zero_momentum_state;
use vortexlab::geometry::GeometryTag;
use vortexlab::models::VortexState;
use vortexlab::rng;

use crate::run::{execute, execute_with_state, RunReport};
use crate::scenario::{CliError, OutputKind, ScenarioSpec, StrengthSource};

pub struct Panel {
    pub spec: ScenarioSpec,
    /// Closed-form initial state overriding the spec's sources (used by the
    /// hyperbolic panels; see below).
    pub state: Option<VortexState<f64>>,
}

fn panel(
    name: &str,
    geometry: GeometryTag,
    n: usize,
    seed: u64,
    zero_circulation: bool,
    zero_momentum: bool,
    t_final: f64,
) -> Panel {
    let mut spec = ScenarioSpec::random(name, geometry, n, seed);
    spec.zero_circulation = zero_circulation;
    spec.zero_momentum = zero_momentum;
    spec.integrator.t_final = t_final;
    spec.integrator.record_stride = 4;
    spec.outputs.insert(OutputKind::FigureSvg);
    Panel { spec, state: None }
}

/// Hyperbolic panels need bounded orbits: mixed-sign configurations travel
/// and leave the numerically representable part of the hyperboloid chart.
/// Nonzero-momentum panels therefore draw same-sign strengths, and
/// zero-momentum panels use the closed-form symmetric construction.
fn hyperbolic_panel(name: &str, n: usize, seed: u64, zero_momentum: bool, t_final: f64) -> Panel {
    let mut spec = ScenarioSpec::random(name, GeometryTag::Hyperbolic, n, seed);
    spec.integrator.t_final = t_final;
    spec.integrator.record_stride = 4;
    spec.outputs.insert(OutputKind::FigureSvg);
    if zero_momentum {
        spec.zero_momentum = true;
        // Some members of the n = 4 family are traveling structures whose
        // coordinates leave the representable chart; draw until a candidate
        // passes a coarse boundedness pre-run.
        let mut rand = rng::stream(seed, rng::streams::POSITIONS);
        let state = loop {
            let candidate = hyperbolic_zero_momentum_state(n, &mut rand)
                .expect("closed-form zero-momentum state");
            if stays_bounded(&candidate, t_final.max(1000.0)) {
                break candidate;
            }
        };
        Panel {
            spec,
            state: Some(state),
        }
    } else {
        let mut rand = rng::stream(seed, rng::streams::STRENGTHS);
        let strengths = (0..n)
            .map(|_| loop {
                let g: f64 = rng::standard_normal(&mut rand);
                if g.abs() > 0.2 {
                    break g.abs();
                }
            })
            .collect();
        spec.strengths = StrengthSource::Explicit(strengths);
        Panel { spec, state: None }
    }
}

fn stays_bounded(state: &VortexState<f64>, horizon: f64) -> bool {
    use vortexlab::integrators::{Method, SolverOptions, Stepper};
    let stepper = Stepper::new(
        state,
        Method::HyperbolicMidpoint,
        SolverOptions::default(),
        None,
    )
    .expect("hyperbolic stepper");
    let dt = 2e-2;
    let mut positions = state.positions().clone();
    for _ in 0..(horizon / dt) as u64 {
        positions = match stepper.step(&positions, dt) {
            Ok(p) => p,
            Err(_) => return false,
        };
        if positions.spatial().unwrap().iter().any(|p| p.z > 50.0) {
            return false;
        }
    }
    true
}

/// The sixteen gallery panels for a base seed.
pub fn panels(seed: u64, t_final: f64) -> Vec<Panel> {
    let s = |k: u64| seed.wrapping_add(k);
    vec![
        panel(
            "sphere_n3_zero_momentum",
            GeometryTag::Sphere,
            3,
            s(0),
            false,
            true,
            t_final,
        ),
        panel(
            "sphere_n3_nonzero_momentum",
            GeometryTag::Sphere,
            3,
            s(1),
            false,
            false,
            t_final,
        ),
        panel(
            "sphere_n4_zero_momentum",
            GeometryTag::Sphere,
            4,
            s(2),
            false,
            true,
            t_final,
        ),
        panel(
            "sphere_n4_nonzero_momentum",
            GeometryTag::Sphere,
            4,
            s(3),
            false,
            false,
            t_final,
        ),
        panel(
            "plane_n3",
            GeometryTag::Plane,
            3,
            s(4),
            false,
            false,
            t_final,
        ),
        panel(
            "plane_n4_zero_circulation_momentum",
            GeometryTag::Plane,
            4,
            s(5),
            true,
            true,
            t_final,
        ),
        panel(
            "plane_n4_zero_circulation",
            GeometryTag::Plane,
            4,
            s(6),
            true,
            false,
            t_final,
        ),
        panel(
            "plane_n4_zero_momentum",
            GeometryTag::Plane,
            4,
            s(7),
            false,
            true,
            t_final,
        ),
        hyperbolic_panel("hyperbolic_n3_zero_momentum", 3, s(8), true, t_final),
        hyperbolic_panel("hyperbolic_n3_nonzero_momentum", 3, s(9), false, t_final),
        hyperbolic_panel("hyperbolic_n4_zero_momentum", 4, s(10), true, t_final),
        hyperbolic_panel("hyperbolic_n4_nonzero_momentum", 4, s(11), false, t_final),
        panel(
            "torus_n2_zero_circulation",
            GeometryTag::Torus,
            2,
            s(12),
            true,
            false,
            t_final,
        ),
        panel(
            "torus_n2_nonzero_circulation",
            GeometryTag::Torus,
            2,
            s(13),
            false,
            false,
            t_final,
        ),
        panel(
            "torus_n3_zero_circulation",
            GeometryTag::Torus,
            3,
            s(14),
            true,
            false,
            t_final,
        ),
        panel(
            "torus_n3_nonzero_circulation",
            GeometryTag::Torus,
            3,
            s(15),
            false,
            false,
            t_final,
        ),
    ]
}

fn thread_cap() -> usize {
    std::env::var("VORTEXLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|v| *v >= 1)
        .unwrap_or_else(|| {
            thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Run every panel, `cap`-way concurrent, writing SVGs into `out_dir`.
/// Failed panels do not stop the rest; the first failure is returned after
/// all panels ran.
pub fn run_gallery(out_dir: &Path, seed: u64, t_final: f64) -> Result<Vec<RunReport>, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let all = panels(seed, t_final);
    let cap = thread_cap().max(1);

    let mut reports: Vec<Result<RunReport, CliError>> = Vec::new();
    for batch in all.chunks(cap) {
        let mut batch_reports: Vec<Option<Result<RunReport, CliError>>> =
            (0..batch.len()).map(|_| None).collect();
        thread::scope(|scope| {
            for (slot, item) in batch_reports.iter_mut().zip(batch) {
                scope.spawn(move || {
                    *slot = Some(match &item.state {
                        Some(state) => execute_with_state(&item.spec, state, out_dir),
                        None => execute(&item.spec, out_dir),
                    });
                });
            }
        });
        reports.extend(batch_reports.into_iter().map(|r| r.expect("panel ran")));
    }

    let mut ok = Vec::new();
    let mut first_err = None;
    for (item, report) in all.iter().zip(reports) {
        match report {
            Ok(r) => {
                println!("{}", r.summary_line());
                ok.push(r);
            }
            Err(e) => {
                eprintln!("panel {}: {e}", item.spec.name);
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(ok),
    }
}
