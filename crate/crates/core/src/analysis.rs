//! Post-hoc trajectory diagnostics: conservation drift, relative-equilibrium
//! residuals, a two-trajectory separation exponent, regime classification,
//! and convergence-order measurement.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    tangent_project_hyperboloid, tangent_project_sphere, torus_displacement, Coords, GeometryTag,
    Point2, Point3,
};
use crate::integrators::{IntegratorSpec, Stepper, Trajectory};
use crate::models::{TorusKernelSpec, VortexState};
use crate::rng;
use crate::scalar::Real;

/// Verdict thresholds. These are versioned constants of the classifier, not
/// properties of the dynamics; they are embedded in classification output so
/// every verdict is self-describing.
pub const CLASSIFIER_VERSION: u32 = 1;
/// Max per-vortex displacement below which a run counts as an equilibrium.
pub const EQUILIBRIUM_DISPLACEMENT: f64 = 1e-10;
/// Max pairwise-separation drift below which a run counts as a relative
/// equilibrium.
pub const RELATIVE_EQUILIBRIUM_DRIFT: f64 = 1e-5;
/// Separation exponent at or below which a run counts as quasi-periodic.
pub const QUASI_PERIODIC_LAMBDA: f64 = 0.01;
/// Separation exponent at or above which a run counts as chaotic.
pub const CHAOTIC_LAMBDA: f64 = 0.05;

/// Selector for one conserved quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Energy,
    Circulation,
    /// Index into [`crate::conserved::MomentumMap::components`].
    Momentum(usize),
}

/// Drift of one conserved quantity along a trajectory.
#[derive(Clone, Debug)]
pub struct DriftReport<T> {
    pub quantity: String,
    pub max_abs_drift: T,
    /// `max_abs_drift` relative to `|q(0)|`, or the absolute drift when the
    /// initial value is zero.
    pub max_rel_drift: T,
    /// Least-squares slope of the quantity against time, per unit time.
    pub drift_rate: T,
}

fn series<T: Real>(trajectory: &Trajectory<T>, quantity: Quantity) -> (String, Vec<T>) {
    match quantity {
        Quantity::Energy => (
            "energy".into(),
            trajectory.diagnostics.iter().map(|d| d.energy).collect(),
        ),
        Quantity::Circulation => (
            "circulation".into(),
            trajectory
                .diagnostics
                .iter()
                .map(|d| d.circulation)
                .collect(),
        ),
        Quantity::Momentum(k) => {
            let name = trajectory.diagnostics[0].momentum.components()[k].0;
            (
                name.into(),
                trajectory
                    .diagnostics
                    .iter()
                    .map(|d| d.momentum.components()[k].1)
                    .collect(),
            )
        }
    }
}

fn least_squares_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let n = T::of(xs.len() as f64);
    let mean_x = xs.iter().copied().sum::<T>() / n;
    let mean_y = ys.iter().copied().sum::<T>() / n;
    let mut num = T::zero();
    let mut den = T::zero();
    for (x, y) in xs.iter().zip(ys) {
        num += (*x - mean_x) * (*y - mean_y);
        den += (*x - mean_x) * (*x - mean_x);
    }
    if den > T::zero() {
        num / den
    } else {
        T::zero()
    }
}

/// Least-squares slope of `log y` against `log x`; the convergence-order
/// estimator.
pub fn log_log_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    least_squares_slope(&lx, &ly)
}

/// Drift of the selected quantity over the trajectory.
pub fn conservation_drift<T: Real>(
    trajectory: &Trajectory<T>,
    quantity: Quantity,
) -> DriftReport<T> {
    let (name, values) = series(trajectory, quantity);
    let q0 = values[0];
    let max_abs = values
        .iter()
        .map(|q| (*q - q0).abs())
        .fold(T::zero(), T::max);
    let max_rel = if q0.abs() > T::zero() {
        max_abs / q0.abs()
    } else {
        max_abs
    };
    DriftReport {
        quantity: name,
        max_abs_drift: max_abs,
        max_rel_drift: max_rel,
        drift_rate: least_squares_slope(&trajectory.times, &values),
    }
}

/// Drift reports for the energy, every momentum component, and the
/// circulation.
pub fn conservation_report<T: Real>(trajectory: &Trajectory<T>) -> Vec<DriftReport<T>> {
    let mut reports = vec![conservation_drift(trajectory, Quantity::Energy)];
    let n_components = trajectory.diagnostics[0].momentum.components().len();
    for k in 0..n_components {
        reports.push(conservation_drift(trajectory, Quantity::Momentum(k)));
    }
    reports.push(conservation_drift(trajectory, Quantity::Circulation));
    reports
}

/// Max over time and vortex pairs of the change in pairwise separation
/// relative to the initial sample. Isometric group orbits keep pairwise
/// separations constant, so this is the relative-equilibrium residual.
pub fn pairwise_invariant_drift<T: Real>(trajectory: &Trajectory<T>) -> T {
    let geometry = trajectory.states[0].geometry();
    let n = trajectory.states[0].n();
    let first = trajectory.states[0].positions();
    let mut drift = T::zero();
    for state in &trajectory.states[1..] {
        let positions = state.positions();
        for i in 0..n {
            for j in (i + 1)..n {
                let d =
                    (positions.separation(geometry, i, j) - first.separation(geometry, i, j)).abs();
                drift = drift.max(d);
            }
        }
    }
    drift
}

/// Max over time and vortices of the embedding-space distance from the
/// initial position (minimum-image on the torus).
pub fn max_displacement<T: Real>(trajectory: &Trajectory<T>) -> T {
    let geometry = trajectory.states[0].geometry();
    let first = trajectory.states[0].positions();
    let mut displacement = T::zero();
    for state in &trajectory.states[1..] {
        match (first, state.positions()) {
            (Coords::Spatial(a), Coords::Spatial(b)) => {
                for (p, q) in a.iter().zip(b) {
                    displacement = displacement.max((*p - *q).norm());
                }
            }
            (Coords::Planar(a), Coords::Planar(b)) => {
                for (p, q) in a.iter().zip(b) {
                    let d = match geometry {
                        GeometryTag::Torus => torus_displacement(*q, *p).norm(),
                        _ => (*q - *p).norm(),
                    };
                    displacement = displacement.max(d);
                }
            }
            _ => unreachable!(),
        }
    }
    displacement
}

fn perturbed<T: Real, R: Rng>(
    state: &VortexState<T>,
    delta0: T,
    rand: &mut R,
) -> Result<Coords<T>> {
    let geometry = state.geometry();
    loop {
        match state.positions() {
            Coords::Spatial(pts) => {
                let mut dirs: Vec<Point3<T>> = Vec::with_capacity(pts.len());
                for p in pts {
                    let v = Point3::new(
                        rng::standard_normal(rand),
                        rng::standard_normal(rand),
                        rng::standard_normal(rand),
                    );
                    dirs.push(match geometry {
                        GeometryTag::Sphere => tangent_project_sphere(*p, v),
                        GeometryTag::Hyperbolic => tangent_project_hyperboloid(*p, v),
                        _ => unreachable!(),
                    });
                }
                let norm = dirs.iter().map(|d| d.norm_squared()).sum::<T>().sqrt();
                if !(norm > T::zero()) {
                    continue;
                }
                let scale = delta0 / norm;
                let moved: Vec<Point3<T>> = pts
                    .iter()
                    .zip(&dirs)
                    .map(|(p, d)| *p + *d * scale)
                    .collect();
                return crate::geometry::project_to_manifold(geometry, &Coords::Spatial(moved));
            }
            Coords::Planar(pts) => {
                let dirs: Vec<Point2<T>> = (0..pts.len())
                    .map(|_| Point2::new(rng::standard_normal(rand), rng::standard_normal(rand)))
                    .collect();
                let norm = dirs.iter().map(|d| d.norm_squared()).sum::<T>().sqrt();
                if !(norm > T::zero()) {
                    continue;
                }
                let scale = delta0 / norm;
                return Ok(Coords::Planar(
                    pts.iter()
                        .zip(&dirs)
                        .map(|(p, d)| *p + *d * scale)
                        .collect(),
                ));
            }
        }
    }
}

fn renormalize_companion<T: Real>(
    reference: &Coords<T>,
    companion: &Coords<T>,
    scale: T,
    geometry: GeometryTag,
) -> Result<Coords<T>> {
    match (reference, companion) {
        (Coords::Spatial(a), Coords::Spatial(b)) => {
            let moved: Vec<Point3<T>> = a
                .iter()
                .zip(b)
                .map(|(p, q)| *p + (*q - *p) * scale)
                .collect();
            crate::geometry::project_to_manifold(geometry, &Coords::Spatial(moved))
        }
        (Coords::Planar(a), Coords::Planar(b)) => Ok(Coords::Planar(
            a.iter()
                .zip(b)
                .map(|(p, q)| {
                    let d = match geometry {
                        GeometryTag::Torus => torus_displacement(*q, *p),
                        _ => *q - *p,
                    };
                    *p + d * scale
                })
                .collect(),
        )),
        _ => unreachable!(),
    }
}

/// Finite-time estimate of the leading Lyapunov exponent by the
/// two-trajectory method: a companion state offset by `delta0` is advanced
/// alongside the reference, the separation is logged and rescaled back to
/// `delta0` every `renorm_interval` time units, and the exponent is the
/// time-average of the logged growth factors (units: 1/time).
///
/// A collision in either trajectory propagates as an error; callers map it
/// to an indeterminate verdict.
pub fn separation_exponent<T: Real, R: Rng>(
    initial: &VortexState<T>,
    spec: &IntegratorSpec<T>,
    kernel: Option<&TorusKernelSpec>,
    delta0: T,
    renorm_interval: T,
    rand: &mut R,
) -> Result<T> {
    spec.validate()?;
    if !(delta0 > T::zero()) {
        return Err(Error::InvalidSpec(
            "perturbation size must be positive".into(),
        ));
    }
    if !(renorm_interval > T::zero()) {
        return Err(Error::InvalidSpec(
            "renormalization interval must be positive".into(),
        ));
    }
    let stepper = Stepper::new(initial, spec.method, spec.solver_options(), kernel)?;
    let geometry = initial.geometry();
    let total_steps = (spec.t_final.as_f64() / spec.dt.as_f64()).round() as u64;
    let renorm_steps = (renorm_interval.as_f64() / spec.dt.as_f64())
        .round()
        .max(1.0) as u64;

    let mut reference = initial.positions().clone();
    let mut companion = perturbed(initial, delta0, rand)?;

    let mut log_sum = T::zero();
    let mut measured = T::zero();
    let mut done = 0u64;
    while done < total_steps {
        let burst = renorm_steps.min(total_steps - done);
        for _ in 0..burst {
            reference = stepper.step(&reference, spec.dt)?;
            companion = stepper.step(&companion, spec.dt)?;
        }
        done += burst;
        let distance = reference.embedding_distance(&companion, geometry);
        if !(distance > T::zero()) {
            return Err(Error::InvalidState(
                "companion trajectory collapsed onto the reference".into(),
            ));
        }
        log_sum += (distance / delta0).ln();
        measured += T::of(burst as f64) * spec.dt;
        companion = renormalize_companion(&reference, &companion, delta0 / distance, geometry)?;
    }
    if !(measured > T::zero()) {
        return Err(Error::InvalidSpec("t_final too short to measure".into()));
    }
    Ok(log_sum / measured)
}

/// Qualitative regime labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equilibrium,
    RelativeEquilibrium,
    QuasiPeriodic,
    Chaotic,
    Indeterminate,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Equilibrium => "equilibrium",
            Verdict::RelativeEquilibrium => "relative_equilibrium",
            Verdict::QuasiPeriodic => "quasi_periodic",
            Verdict::Chaotic => "chaotic",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Classification of one run.
#[derive(Clone, Debug)]
pub struct ClassificationReport<T> {
    pub displacement: T,
    pub pairwise_drift: T,
    /// Separation exponent; `None` when its companion run was indeterminate
    /// (collision) or was skipped because the verdict was already decided.
    pub lambda: Option<T>,
    pub verdict: Verdict,
}

/// Deterministic verdict from the measured quantities against the documented
/// thresholds.
pub fn classify<T: Real>(displacement: T, pairwise_drift: T, lambda: Option<T>) -> Verdict {
    if displacement <= T::of(EQUILIBRIUM_DISPLACEMENT) {
        return Verdict::Equilibrium;
    }
    if pairwise_drift <= T::of(RELATIVE_EQUILIBRIUM_DRIFT) {
        return Verdict::RelativeEquilibrium;
    }
    match lambda {
        Some(l) if l >= T::of(CHAOTIC_LAMBDA) => Verdict::Chaotic,
        Some(l) if l <= T::of(QUASI_PERIODIC_LAMBDA) => Verdict::QuasiPeriodic,
        _ => Verdict::Indeterminate,
    }
}

/// Classify a finished trajectory, given the separately measured exponent.
pub fn classification<T: Real>(
    trajectory: &Trajectory<T>,
    lambda: Option<T>,
) -> ClassificationReport<T> {
    let displacement = max_displacement(trajectory);
    let pairwise_drift = pairwise_invariant_drift(trajectory);
    ClassificationReport {
        displacement,
        pairwise_drift,
        lambda,
        verdict: classify(displacement, pairwise_drift, lambda),
    }
}

/// Observed convergence order of `method` on `initial`: integrate to `t_end`
/// for each step size in the ladder, measure the final-state error against a
/// reference at `min(dts)/8`, and fit the log-log slope.
pub fn convergence_order<T: Real>(
    initial: &VortexState<T>,
    spec: &IntegratorSpec<T>,
    kernel: Option<&TorusKernelSpec>,
    dts: &[T],
    t_end: T,
) -> Result<T> {
    if dts.len() < 4 {
        return Err(Error::InvalidSpec(
            "convergence ladder needs at least 4 step sizes".into(),
        ));
    }
    let stepper = Stepper::new(initial, spec.method, spec.solver_options(), kernel)?;
    let geometry = initial.geometry();

    let run = |dt: T| -> Result<Coords<T>> {
        let steps = (t_end.as_f64() / dt.as_f64()).round() as u64;
        let mut positions = initial.positions().clone();
        for _ in 0..steps {
            positions = stepper.step(&positions, dt)?;
        }
        Ok(positions)
    };

    let dt_min = dts.iter().copied().fold(T::infinity(), T::min);
    let reference = run(dt_min / T::of(8.0))?;
    let mut errors = Vec::with_capacity(dts.len());
    for dt in dts {
        let finals = run(*dt)?;
        errors.push(finals.embedding_distance(&reference, geometry));
    }
    Ok(log_log_slope(dts, &errors))
}

/// Max absolute drift per named quantity; convenience for reporting layers.
pub fn drift_summary<T: Real>(trajectory: &Trajectory<T>) -> Vec<(String, T)> {
    conservation_report(trajectory)
        .into_iter()
        .map(|r| (r.quantity, r.max_abs_drift))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{integrate, Method};

    fn dipole_trajectory() -> Trajectory<f64> {
        let state = VortexState::new(
            GeometryTag::Plane,
            Coords::Planar(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
            vec![1.0, -1.0],
        )
        .unwrap();
        let mut spec = IntegratorSpec::new(Method::ImplicitMidpoint, 1e-3, 2.0);
        spec.record_stride = 50;
        integrate(&state, &spec, None).unwrap()
    }

    #[test]
    fn constant_series_has_zero_drift() {
        let traj = dipole_trajectory();
        let report = conservation_drift(&traj, Quantity::Circulation);
        assert_eq!(report.max_abs_drift, 0.0);
        assert_eq!(report.drift_rate, 0.0);
    }

    #[test]
    fn dipole_is_a_relative_equilibrium() {
        let traj = dipole_trajectory();
        assert!(pairwise_invariant_drift(&traj) <= 1e-8);
        assert!(max_displacement(&traj) > 0.1);
        let report = classification(&traj, None);
        assert_eq!(report.verdict, Verdict::RelativeEquilibrium);
    }

    #[test]
    fn antipodal_pair_is_an_equilibrium() {
        let state = VortexState::new(
            GeometryTag::Sphere,
            Coords::Spatial(vec![
                Point3::new(0.0, 0.0, 1.0),
                Point3::new(0.0, 0.0, -1.0),
            ]),
            vec![1.0, 1.0],
        )
        .unwrap();
        let mut spec = IntegratorSpec::new(Method::SphericalMidpoint, 1e-2, 5.0);
        spec.record_stride = 100;
        let traj = integrate(&state, &spec, None).unwrap();
        assert!(max_displacement(&traj) <= 1e-13);
        assert_eq!(classification(&traj, None).verdict, Verdict::Equilibrium);
    }

    #[test]
    fn verdicts_are_deterministic_functions_of_thresholds() {
        assert_eq!(classify(1e-12, 0.0, None), Verdict::Equilibrium);
        assert_eq!(classify(1.0, 1e-6, None), Verdict::RelativeEquilibrium);
        assert_eq!(classify(1.0, 1.0, Some(0.2)), Verdict::Chaotic);
        assert_eq!(classify(1.0, 1.0, Some(0.001)), Verdict::QuasiPeriodic);
        assert_eq!(classify(1.0, 1.0, Some(0.03)), Verdict::Indeterminate);
        assert_eq!(classify(1.0, 1.0, None), Verdict::Indeterminate);
    }

    #[test]
    fn log_log_slope_recovers_known_exponent() {
        let xs = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert!((log_log_slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn euler_control_fixture_measures_first_order() {
        // Sanity control for the order estimator: explicit Euler on the
        // co-rotating pair, whose exact solution is a rigid rotation at
        // angular velocity 1/pi about the origin.
        let strengths = [1.0, 1.0];
        let start = [Point2::new(0.5, 0.0), Point2::new(-0.5, 0.0)];
        let t_end = 1.0;
        let euler_run = |dt: f64| {
            let steps = (t_end / dt).round() as u64;
            let mut r = start.to_vec();
            for _ in 0..steps {
                let v = crate::models::rhs_plane(&r, &strengths).unwrap();
                for (p, vi) in r.iter_mut().zip(&v) {
                    *p = *p + *vi * dt;
                }
            }
            r
        };
        let theta = t_end / std::f64::consts::PI;
        let exact = [
            Point2::new(0.5 * theta.cos(), 0.5 * theta.sin()),
            Point2::new(-0.5 * theta.cos(), -0.5 * theta.sin()),
        ];
        let dts = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let errors: Vec<f64> = dts
            .iter()
            .map(|dt| {
                let finals = euler_run(*dt);
                finals
                    .iter()
                    .zip(&exact)
                    .map(|(a, b)| (*a - *b).norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        let order = log_log_slope(&dts, &errors);
        assert!((order - 1.0).abs() <= 0.1, "Euler control order {order}");
    }

    #[test]
    fn separation_exponent_near_zero_for_dipole() {
        let state = VortexState::new(
            GeometryTag::Plane,
            Coords::Planar(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
            vec![1.0, -1.0],
        )
        .unwrap();
        let spec = IntegratorSpec::new(Method::ImplicitMidpoint, 1e-2, 1000.0);
        let mut rand = crate::rng::stream(41, crate::rng::streams::PERTURBATION);
        let lambda: f64 = separation_exponent(&state, &spec, None, 1e-8, 1.0, &mut rand).unwrap();
        assert!(lambda.abs() <= 0.01, "dipole lambda = {lambda}");
    }
}
