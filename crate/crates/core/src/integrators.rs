//! Structure-preserving one-step methods and the time-stepping driver.
//!
//! All three methods solve `b = a + dt X(m(a, b))` for the updated positions
//! `b` by plain fixed-point iteration, differing only in the midpoint map:
//! the flat implicit midpoint uses `m = (a + b)/2`, the spherical midpoint
//! normalizes the ray `m = (a + b)/|a + b|`, and the hyperbolic midpoint
//! normalizes in the Minkowski form. Because the field is tangent at `m`,
//! the ray-normalized variants preserve `|b| = |a|` (respectively
//! `b ._L b = a ._L a`) up to the solver residual, so trajectories stay on
//! the manifold without any correction step.

use crate::conserved::{conserved_set, ConservedSet};
use crate::error::{Error, Result};
use crate::geometry::{
    project_hyperboloid, project_unit_sphere, Coords, GeometryTag, Point2, Point3,
};
use crate::models::{
    rhs_hyperbolic, rhs_plane, rhs_sphere, rhs_torus, TorusKernelSpec, VortexState,
};
use crate::scalar::Real;

/// One-step method selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ImplicitMidpoint,
    SphericalMidpoint,
    HyperbolicMidpoint,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ImplicitMidpoint => "implicit_midpoint",
            Method::SphericalMidpoint => "spherical_midpoint",
            Method::HyperbolicMidpoint => "hyperbolic_midpoint",
        }
    }

    /// The method a geometry uses by default.
    pub fn default_for(geometry: GeometryTag) -> Method {
        match geometry {
            GeometryTag::Sphere => Method::SphericalMidpoint,
            GeometryTag::Hyperbolic => Method::HyperbolicMidpoint,
            GeometryTag::Plane | GeometryTag::Torus => Method::ImplicitMidpoint,
        }
    }

    /// Spherical midpoint pairs with the sphere, hyperbolic with the
    /// hyperboloid, implicit midpoint with the flat geometries.
    pub fn compatible_with(self, geometry: GeometryTag) -> bool {
        Method::default_for(geometry) == self
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Fixed-point solver controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions<T> {
    /// Convergence threshold on the max-norm update between iterates.
    pub tol: T,
    pub max_iter: u32,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::of(1e-12),
            max_iter: 100,
        }
    }
}

/// Full description of one integration run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorSpec<T> {
    pub method: Method,
    pub dt: T,
    pub t_final: T,
    pub solver_tol: T,
    pub solver_max_iter: u32,
    /// Record every `record_stride`-th step (the initial state is always
    /// recorded).
    pub record_stride: u32,
}

impl<T: Real> IntegratorSpec<T> {
    pub fn new(method: Method, dt: T, t_final: T) -> Self {
        Self {
            method,
            dt,
            t_final,
            solver_tol: T::of(1e-12),
            solver_max_iter: 100,
            record_stride: 1,
        }
    }

    /// Per-geometry defaults: the matching method, `dt = 1e-2` (`1e-3` on the
    /// scale-free plane), `t_final = 100`.
    pub fn default_for(geometry: GeometryTag) -> Self {
        let dt = match geometry {
            GeometryTag::Plane => 1e-3,
            _ => 1e-2,
        };
        let mut spec = Self::new(Method::default_for(geometry), T::of(dt), T::of(100.0));
        spec.record_stride = 10;
        spec
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidSpec("dt must be positive".into()));
        }
        if !(self.t_final >= T::zero()) || !self.t_final.is_finite() {
            return Err(Error::InvalidSpec("t_final must be nonnegative".into()));
        }
        if self.t_final > T::zero() && self.dt > self.t_final {
            return Err(Error::InvalidSpec("dt must not exceed t_final".into()));
        }
        if !(self.solver_tol > T::zero()) {
            return Err(Error::InvalidSpec("solver_tol must be positive".into()));
        }
        if self.solver_max_iter == 0 {
            return Err(Error::InvalidSpec("solver_max_iter must be >= 1".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidSpec("record_stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions<T> {
        SolverOptions {
            tol: self.solver_tol,
            max_iter: self.solver_max_iter,
        }
    }
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RunStatus<T> {
    Completed,
    Collision { t: T },
    SolverDiverged { t: T },
}

impl<T> RunStatus<T> {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

/// Recorded samples of one run: a uniform time grid, the states, and their
/// conserved-quantity diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<VortexState<T>>,
    pub diagnostics: Vec<ConservedSet<T>>,
    pub status: RunStatus<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &VortexState<T> {
        self.states
            .last()
            .expect("trajectory has at least one sample")
    }
}

trait StepPoint<T: Real>: Copy {
    fn add_scaled(self, v: Self, dt: T) -> Self;
    fn diff_max_abs(self, other: Self) -> T;
    fn magnitude(self) -> T;
}

impl<T: Real> StepPoint<T> for Point3<T> {
    #[inline]
    fn add_scaled(self, v: Self, dt: T) -> Self {
        self + v * dt
    }
    #[inline]
    fn diff_max_abs(self, other: Self) -> T {
        (self - other).max_abs()
    }
    #[inline]
    fn magnitude(self) -> T {
        self.max_abs()
    }
}

impl<T: Real> StepPoint<T> for Point2<T> {
    #[inline]
    fn add_scaled(self, v: Self, dt: T) -> Self {
        self + v * dt
    }
    #[inline]
    fn diff_max_abs(self, other: Self) -> T {
        (self - other).max_abs()
    }
    #[inline]
    fn magnitude(self) -> T {
        self.max_abs()
    }
}

/// Fixed-point iteration for `b = a + dt X(m(a, b))`.
///
/// Convergence is judged against the coordinate scale, `tol * max(1, |b|)`
/// in the max norm: hyperboloid (and torus lift) coordinates are unbounded,
/// so an absolute threshold would become unreachable once rounding jitter
/// exceeds it. After converging, the iteration keeps polishing while the
/// update still strictly decreases; this lands on the fixed point to roughly
/// machine precision, which is what keeps manifold residuals from
/// accumulating over long runs.
fn solve_midpoint_step<T, P, F, M>(
    start: &[P],
    dt: T,
    opts: &SolverOptions<T>,
    field: F,
    midpoint: M,
) -> Result<Vec<P>>
where
    T: Real,
    P: StepPoint<T>,
    F: Fn(&[P]) -> Result<Vec<P>>,
    M: Fn(P, P) -> Result<P>,
{
    let mut current: Vec<P> = start.to_vec();
    let mut mids: Vec<P> = start.to_vec();
    let mut converged = false;
    let mut prev_delta = T::infinity();
    let mut iterations: u32 = 0;
    loop {
        for (m, (a, b)) in mids.iter_mut().zip(start.iter().zip(&current)) {
            *m = midpoint(*a, *b)?;
        }
        let velocities = field(&mids)?;
        let mut delta = T::zero();
        let mut scale = T::one();
        for ((b, a), v) in current.iter_mut().zip(start).zip(&velocities) {
            let next = a.add_scaled(*v, dt);
            delta = delta.max(next.diff_max_abs(*b));
            scale = scale.max(next.magnitude());
            *b = next;
        }
        iterations += 1;
        if delta <= opts.tol * scale {
            converged = true;
        }
        if converged && (delta == T::zero() || delta >= prev_delta) {
            break;
        }
        if iterations >= opts.max_iter {
            if converged {
                break;
            }
            return Err(Error::SolverDiverged {
                iterations,
                residual: delta.as_f64(),
            });
        }
        prev_delta = delta;
    }
    Ok(current)
}

/// Implicit midpoint step on a flat geometry: solves
/// `b = a + dt X((a + b)/2)`.
pub fn step_implicit_midpoint<T, F>(
    field: F,
    start: &[Point2<T>],
    dt: T,
    opts: &SolverOptions<T>,
) -> Result<Vec<Point2<T>>>
where
    T: Real,
    F: Fn(&[Point2<T>]) -> Result<Vec<Point2<T>>>,
{
    let half = T::of(0.5);
    solve_midpoint_step(start, dt, opts, field, |a, b| Ok((a + b) * half))
}

/// Spherical midpoint step: solves `b_i = a_i + dt X_i(m)` with the
/// ray-normalized midpoints `m_j = (a_j + b_j)/|a_j + b_j|`.
pub fn step_spherical_midpoint<T, F>(
    field: F,
    start: &[Point3<T>],
    dt: T,
    opts: &SolverOptions<T>,
) -> Result<Vec<Point3<T>>>
where
    T: Real,
    F: Fn(&[Point3<T>]) -> Result<Vec<Point3<T>>>,
{
    solve_midpoint_step(start, dt, opts, field, |a, b| project_unit_sphere(a + b))
}

/// Hyperbolic midpoint step: the same scheme with Minkowski normalization
/// `m_j = (a_j + b_j)/sqrt((a_j + b_j) ._L (a_j + b_j))` on the upper sheet.
pub fn step_hyperbolic_midpoint<T, F>(
    field: F,
    start: &[Point3<T>],
    dt: T,
    opts: &SolverOptions<T>,
) -> Result<Vec<Point3<T>>>
where
    T: Real,
    F: Fn(&[Point3<T>]) -> Result<Vec<Point3<T>>>,
{
    solve_midpoint_step(start, dt, opts, field, |a, b| project_hyperboloid(a + b))
}

/// Reusable stepping context for one configuration: geometry, strengths,
/// method, solver controls, and the torus kernel.
#[derive(Clone, Debug)]
pub struct Stepper<T> {
    geometry: GeometryTag,
    method: Method,
    strengths: Vec<T>,
    kernel: TorusKernelSpec,
    opts: SolverOptions<T>,
}

impl<T: Real> Stepper<T> {
    pub fn new(
        state: &VortexState<T>,
        method: Method,
        opts: SolverOptions<T>,
        kernel: Option<&TorusKernelSpec>,
    ) -> Result<Self> {
        if !method.compatible_with(state.geometry()) {
            return Err(Error::IncompatibleMethod {
                method,
                geometry: state.geometry(),
            });
        }
        Ok(Self {
            geometry: state.geometry(),
            method,
            strengths: state.strengths().to_vec(),
            kernel: kernel.copied().unwrap_or_default(),
            opts,
        })
    }

    pub fn geometry(&self) -> GeometryTag {
        self.geometry
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Advance `positions` by one step of size `dt` (which may be negative;
    /// all three methods are self-adjoint).
    pub fn step(&self, positions: &Coords<T>, dt: T) -> Result<Coords<T>> {
        match (self.geometry, positions) {
            (GeometryTag::Sphere, Coords::Spatial(pts)) => Ok(Coords::Spatial(
                step_spherical_midpoint(|m| rhs_sphere(m, &self.strengths), pts, dt, &self.opts)?,
            )),
            (GeometryTag::Hyperbolic, Coords::Spatial(pts)) => {
                Ok(Coords::Spatial(step_hyperbolic_midpoint(
                    |m| rhs_hyperbolic(m, &self.strengths),
                    pts,
                    dt,
                    &self.opts,
                )?))
            }
            (GeometryTag::Plane, Coords::Planar(pts)) => Ok(Coords::Planar(
                step_implicit_midpoint(|m| rhs_plane(m, &self.strengths), pts, dt, &self.opts)?,
            )),
            (GeometryTag::Torus, Coords::Planar(pts)) => {
                Ok(Coords::Planar(step_implicit_midpoint(
                    |m| rhs_torus(m, &self.strengths, &self.kernel),
                    pts,
                    dt,
                    &self.opts,
                )?))
            }
            _ => Err(Error::InvalidState(
                "coordinate variant does not match the stepper geometry".into(),
            )),
        }
    }
}

/// Integrate from `t = 0` to `t_final`, recording every `record_stride`-th
/// step. A collision or solver failure mid-run truncates the trajectory and
/// sets the status; an invalid spec, an incompatible method, or an initial
/// state that already collides is a hard error.
pub fn integrate<T: Real>(
    initial: &VortexState<T>,
    spec: &IntegratorSpec<T>,
    kernel: Option<&TorusKernelSpec>,
) -> Result<Trajectory<T>> {
    spec.validate()?;
    let stepper = Stepper::new(initial, spec.method, spec.solver_options(), kernel)?;
    initial.collision_check()?;

    let n_steps = (spec.t_final.as_f64() / spec.dt.as_f64()).round() as u64;
    let stride = spec.record_stride as u64;
    let kernel_ref = Some(&stepper.kernel);

    let mut trajectory = Trajectory {
        times: vec![T::zero()],
        states: vec![initial.clone()],
        diagnostics: vec![conserved_set(initial, kernel_ref)?],
        status: RunStatus::Completed,
    };

    let mut positions = initial.positions().clone();
    for k in 1..=n_steps {
        let t_step = T::of((k - 1) as f64) * spec.dt;
        match stepper.step(&positions, spec.dt) {
            Ok(next) => positions = next,
            Err(Error::Collision { .. }) => {
                trajectory.status = RunStatus::Collision { t: t_step };
                return Ok(trajectory);
            }
            Err(_) => {
                trajectory.status = RunStatus::SolverDiverged { t: t_step };
                return Ok(trajectory);
            }
        }
        if k % stride == 0 {
            let state = VortexState::from_parts_unchecked(
                initial.geometry(),
                positions.clone(),
                initial.strengths().to_vec(),
            );
            match conserved_set(&state, kernel_ref) {
                Ok(diag) => {
                    trajectory.times.push(T::of(k as f64) * spec.dt);
                    trajectory.states.push(state);
                    trajectory.diagnostics.push(diag);
                }
                Err(Error::Collision { .. }) => {
                    trajectory.status = RunStatus::Collision {
                        t: T::of(k as f64) * spec.dt,
                    };
                    return Ok(trajectory);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(trajectory)
}
