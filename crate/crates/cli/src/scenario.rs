//! Scenario files: TOML documents with a versioned `schema = 1` key.
//!
//! ```toml
//! schema = 1
//! name = "sphere-trio"
//! geometry = "sphere"          # sphere | plane | hyperbolic | torus
//! n = 3
//! seed = 7
//! constraints = ["zero_momentum"]
//! # strengths = [1.0, -1.0, 0.5]          # omitted: random normal(0, 1)
//! # positions = [[x, y, z], ...]          # omitted: random
//! outputs = ["trajectory_csv", "conserved_csv", "classification_json"]
//!
//! [integrator]
//! method = "spherical_midpoint"
//! dt = 0.01
//! t_final = 100.0
//! ```
//!
//! Unknown keys are rejected; defaults fill everything optional.

use std::collections::BTreeSet;

use serde::Deserialize;
use vortexlab::conserved::project_constraints;
use vortexlab::geometry::{
    project_to_manifold, sample_positions, sphere_separation, Coords, GeometryTag, Point2, Point3,
};
use vortexlab::integrators::{IntegratorSpec, Method};
use vortexlab::models::{TorusKernelSpec, VortexState};
use vortexlab::{rng, Error};

/// Errors carrying the process exit code: 1 config, 2 solver divergence,
/// 3 collision, 4 infeasible constraints.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Collision(String),
    Infeasible(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Collision(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver divergence: {m}"),
            CliError::Collision(m) => write!(f, "vortex collision: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible constraints: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Map a core error to the exit-code classes.
pub fn from_core(e: Error) -> CliError {
    match e {
        Error::Collision { .. } => CliError::Collision(e.to_string()),
        Error::SolverDiverged { .. } | Error::ZeroVector | Error::NonTimelike => {
            CliError::Solver(e.to_string())
        }
        Error::Infeasible(_) => CliError::Infeasible(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    TrajectoryCsv,
    ConservedCsv,
    ClassificationJson,
    FigureSvg,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GeometryName {
    Sphere,
    Plane,
    Hyperbolic,
    Torus,
}

impl From<GeometryName> for GeometryTag {
    fn from(g: GeometryName) -> Self {
        match g {
            GeometryName::Sphere => GeometryTag::Sphere,
            GeometryName::Plane => GeometryTag::Plane,
            GeometryName::Hyperbolic => GeometryTag::Hyperbolic,
            GeometryName::Torus => GeometryTag::Torus,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum ConstraintName {
    ZeroMomentum,
    ZeroCirculation,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MethodName {
    ImplicitMidpoint,
    SphericalMidpoint,
    HyperbolicMidpoint,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::ImplicitMidpoint => Method::ImplicitMidpoint,
            MethodName::SphericalMidpoint => Method::SphericalMidpoint,
            MethodName::HyperbolicMidpoint => Method::HyperbolicMidpoint,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorDoc {
    method: Option<MethodName>,
    dt: Option<f64>,
    t_final: Option<f64>,
    solver_tol: Option<f64>,
    solver_max_iter: Option<u32>,
    record_stride: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    schema: u32,
    name: Option<String>,
    geometry: GeometryName,
    n: usize,
    seed: u64,
    strengths: Option<Vec<f64>>,
    positions: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    constraints: Vec<ConstraintName>,
    outputs: Option<Vec<OutputKind>>,
    torus_truncation: Option<u32>,
    integrator: Option<IntegratorDoc>,
}

#[derive(Debug, Clone)]
pub enum StrengthSource {
    Explicit(Vec<f64>),
    /// Independent draws from the unit normal.
    RandomNormal,
}

#[derive(Debug, Clone)]
pub enum PositionSource {
    Explicit(Coords<f64>),
    /// Geometry-appropriate random draws (uniform on compact geometries,
    /// Gaussian on the plane).
    Random,
}

/// A fully resolved, validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub geometry: GeometryTag,
    pub n: usize,
    pub seed: u64,
    pub strengths: StrengthSource,
    pub positions: PositionSource,
    pub zero_momentum: bool,
    pub zero_circulation: bool,
    pub integrator: IntegratorSpec<f64>,
    pub kernel: TorusKernelSpec,
    pub outputs: BTreeSet<OutputKind>,
}

impl ScenarioSpec {
    /// All-defaults scenario with random initial data; the building block for
    /// gallery panels and the `order` study.
    pub fn random(name: &str, geometry: GeometryTag, n: usize, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            geometry,
            n,
            seed,
            strengths: StrengthSource::RandomNormal,
            positions: PositionSource::Random,
            zero_momentum: false,
            zero_circulation: false,
            integrator: IntegratorSpec::default_for(geometry),
            kernel: TorusKernelSpec::default(),
            outputs: BTreeSet::new(),
        }
    }
}

fn explicit_positions(
    geometry: GeometryTag,
    rows: &[Vec<f64>],
    n: usize,
) -> Result<Coords<f64>, CliError> {
    if rows.len() != n {
        return Err(CliError::Config(format!(
            "positions lists {} vortices but n = {n}",
            rows.len()
        )));
    }
    let dims = if geometry.is_spatial() { 3 } else { 2 };
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dims {
            return Err(CliError::Config(format!(
                "position {i} has {} coordinates; {geometry} needs {dims}",
                row.len()
            )));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config(format!("position {i} is not finite")));
        }
    }
    let coords = if geometry.is_spatial() {
        Coords::Spatial(rows.iter().map(|r| Point3::new(r[0], r[1], r[2])).collect())
    } else {
        Coords::Planar(rows.iter().map(|r| Point2::new(r[0], r[1])).collect())
    };
    let residual = coords.manifold_residual(geometry);
    if residual > 1e-6 {
        return Err(CliError::Config(format!(
            "positions violate the {geometry} constraint (residual {residual:.3e} > 1e-6)"
        )));
    }
    // Snap rounding-level residuals exactly onto the manifold.
    project_to_manifold(geometry, &coords).map_err(from_core)
}

/// Parse and validate one scenario document. `default_name` (usually the
/// file stem) is used when the document has no `name` key.
pub fn parse_scenario(text: &str, default_name: &str) -> Result<ScenarioSpec, CliError> {
    let doc: ScenarioDoc =
        toml::from_str(text).map_err(|e| CliError::Config(format!("scenario file: {e}")))?;
    if doc.schema != 1 {
        return Err(CliError::Config(format!(
            "unsupported schema {} (expected 1)",
            doc.schema
        )));
    }
    if doc.n == 0 {
        return Err(CliError::Config("n must be at least 1".into()));
    }
    let geometry: GeometryTag = doc.geometry.into();

    let strengths = match &doc.strengths {
        None => StrengthSource::RandomNormal,
        Some(list) => {
            if list.len() != doc.n {
                return Err(CliError::Config(format!(
                    "strengths lists {} values but n = {}",
                    list.len(),
                    doc.n
                )));
            }
            if list.iter().any(|g| *g == 0.0 || !g.is_finite()) {
                return Err(CliError::Config(
                    "vortex strengths must be finite and nonzero".into(),
                ));
            }
            StrengthSource::Explicit(list.clone())
        }
    };

    let positions = match &doc.positions {
        None => PositionSource::Random,
        Some(rows) => PositionSource::Explicit(explicit_positions(geometry, rows, doc.n)?),
    };

    let idoc = doc.integrator.unwrap_or_default();
    let mut integrator = IntegratorSpec::default_for(geometry);
    if let Some(method) = idoc.method {
        integrator.method = method.into();
    }
    if let Some(dt) = idoc.dt {
        integrator.dt = dt;
    }
    if let Some(t_final) = idoc.t_final {
        integrator.t_final = t_final;
    }
    if let Some(tol) = idoc.solver_tol {
        integrator.solver_tol = tol;
    }
    if let Some(iters) = idoc.solver_max_iter {
        integrator.solver_max_iter = iters;
    }
    if let Some(stride) = idoc.record_stride {
        integrator.record_stride = stride;
    }
    if !integrator.method.compatible_with(geometry) {
        return Err(CliError::Config(format!(
            "{} cannot integrate {geometry} states",
            integrator.method
        )));
    }
    integrator
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let kernel = TorusKernelSpec::new(doc.torus_truncation.unwrap_or(10))
        .map_err(|e| CliError::Config(e.to_string()))?;

    let zero_momentum = doc.constraints.contains(&ConstraintName::ZeroMomentum);
    let zero_circulation = doc.constraints.contains(&ConstraintName::ZeroCirculation);

    let outputs: BTreeSet<OutputKind> = doc
        .outputs
        .unwrap_or_else(|| {
            vec![
                OutputKind::TrajectoryCsv,
                OutputKind::ConservedCsv,
                OutputKind::ClassificationJson,
            ]
        })
        .into_iter()
        .collect();

    let spec = ScenarioSpec {
        name: doc.name.unwrap_or_else(|| default_name.to_string()),
        geometry,
        n: doc.n,
        seed: doc.seed,
        strengths,
        positions,
        zero_momentum,
        zero_circulation,
        integrator,
        kernel,
        outputs,
    };
    check_feasibility(&spec)?;
    Ok(spec)
}

/// Constraint requests that no valid configuration can satisfy.
fn check_feasibility(spec: &ScenarioSpec) -> Result<(), CliError> {
    if spec.geometry == GeometryTag::Plane
        && spec.n == 2
        && spec.zero_momentum
        && spec.zero_circulation
    {
        return Err(CliError::Infeasible(
            "plane N=2 with zero circulation and zero momentum forces coincident vortices".into(),
        ));
    }
    if spec.geometry == GeometryTag::Hyperbolic && spec.n == 2 && spec.zero_momentum {
        return Err(CliError::Infeasible(
            "hyperbolic N=2 zero momentum forces coincident vortices".into(),
        ));
    }
    if spec.geometry == GeometryTag::Sphere && spec.n == 2 && spec.zero_momentum {
        // Zero momentum on the sphere pair exists only for the antipodal
        // equal-strength configuration; reject requests that would have to
        // be forced onto it.
        let antipodal_fixture = match (&spec.positions, &spec.strengths) {
            (PositionSource::Explicit(coords), StrengthSource::Explicit(g)) => {
                let pts = coords.spatial().expect("sphere positions");
                sphere_separation(pts[0], -pts[1]) < 1e-9 && (g[0] - g[1]).abs() < 1e-12
            }
            _ => false,
        };
        if !antipodal_fixture {
            return Err(CliError::Infeasible(
                "sphere N=2 zero momentum only admits the antipodal equal-strength pair; \
                 give those positions and strengths explicitly"
                    .into(),
            ));
        }
    }
    Ok(())
}

const MAX_SAMPLING_ATTEMPTS: u64 = 32;

/// Materialize the initial state: draw any random sources, then apply the
/// requested constraint projections. Random draws that land on an infeasible
/// projection or closer than `1e-6` in pair separation are redrawn from the
/// next attempt stream, deterministically in (seed, attempt).
pub fn build_initial_state(spec: &ScenarioSpec) -> Result<VortexState<f64>, CliError> {
    let has_random = matches!(spec.strengths, StrengthSource::RandomNormal)
        || matches!(spec.positions, PositionSource::Random);
    let attempts = if has_random { MAX_SAMPLING_ATTEMPTS } else { 1 };
    let mut last_err = CliError::Infeasible("no sampling attempt succeeded".into());

    for attempt in 0..attempts {
        let positions = match &spec.positions {
            PositionSource::Explicit(coords) => coords.clone(),
            PositionSource::Random => {
                let mut rand = rng::stream(
                    spec.seed,
                    rng::streams::POSITIONS + attempt * rng::streams::ATTEMPT_STRIDE,
                );
                sample_positions(spec.geometry, spec.n, &mut rand)
            }
        };
        let strengths = match &spec.strengths {
            StrengthSource::Explicit(list) => list.clone(),
            StrengthSource::RandomNormal => {
                let mut rand = rng::stream(
                    spec.seed,
                    rng::streams::STRENGTHS + attempt * rng::streams::ATTEMPT_STRIDE,
                );
                (0..spec.n)
                    .map(|_| loop {
                        let g: f64 = rng::standard_normal(&mut rand);
                        if g.abs() > 1e-12 {
                            break g;
                        }
                    })
                    .collect()
            }
        };

        let built = VortexState::new(spec.geometry, positions, strengths)
            .map_err(from_core)
            .and_then(|state| {
                if spec.zero_circulation || spec.zero_momentum {
                    project_constraints(&state, spec.zero_circulation, spec.zero_momentum)
                        .map_err(from_core)
                } else {
                    Ok(state)
                }
            });
        match built {
            Ok(state) => {
                // The floor only gates random draws; explicit positions flow
                // through to the integrator's own collision guard.
                if has_random && state.min_separation() < 1e-6 {
                    last_err = CliError::Infeasible(format!(
                        "sampled configuration starts closer than 1e-6 (attempt {attempt})"
                    ));
                    continue;
                }
                return Ok(state);
            }
            Err(e @ (CliError::Infeasible(_) | CliError::Config(_))) => {
                if !has_random {
                    return Err(e);
                }
                last_err = e;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}
