//! The `check` verb: a quick invariant smoke suite, one PASS/FAIL line per
//! check, exit 0 only if everything passes.

use vortexlab::conserved::{circulation, equivariance_defect_plane, equivariance_residual_sphere};
use vortexlab::geometry::{
    cross_l, minkowski_dot, project_to_manifold, random_rotation, sample_positions, Coords,
    GeometryTag, Point2, Point3,
};
use vortexlab::integrators::{Method, SolverOptions, Stepper};
use vortexlab::models::{rhs, torus_kernel, torus_kernel_grad, TorusKernelSpec, VortexState};
use vortexlab::rng;

struct Check {
    passed: usize,
    failed: usize,
}

impl Check {
    fn report(&mut self, name: &str, detail: String, ok: bool) {
        if ok {
            self.passed += 1;
            println!("check {name}: PASS ({detail})");
        } else {
            self.failed += 1;
            println!("check {name}: FAIL ({detail})");
        }
    }
}

const GEOMETRIES: [GeometryTag; 4] = [
    GeometryTag::Sphere,
    GeometryTag::Plane,
    GeometryTag::Hyperbolic,
    GeometryTag::Torus,
];

fn random_state(geometry: GeometryTag, n: usize, seed: u64) -> VortexState<f64> {
    let mut pos = rng::stream(seed, rng::streams::POSITIONS);
    let mut strengths = rng::stream(seed, rng::streams::STRENGTHS);
    loop {
        let positions: Coords<f64> = sample_positions(geometry, n, &mut pos);
        let g: Vec<f64> = (0..n)
            .map(|_| loop {
                let g: f64 = rng::standard_normal(&mut strengths);
                if g.abs() > 0.2 {
                    break g;
                }
            })
            .collect();
        if let Ok(state) = VortexState::new(geometry, positions, g) {
            if state.min_separation() > 0.1 {
                return state;
            }
        }
    }
}

/// Run the smoke suite; returns the number of failed checks.
pub fn run_checks() -> usize {
    let mut out = Check {
        passed: 0,
        failed: 0,
    };
    let mut rand = rng::stream(2024, 0);

    // Minkowski cross product orthogonality.
    let a: Point3<f64> = Point3::new(0.3, -1.1, 2.2);
    let b = Point3::new(0.9, 0.4, -0.7);
    let c = cross_l(a, b);
    let worst = minkowski_dot(c, a).abs().max(minkowski_dot(c, b).abs());
    out.report(
        "cross_L orthogonality",
        format!("residual {worst:.1e}"),
        worst <= 1e-14,
    );

    // Projection idempotence on all four geometries, relative to coordinate
    // scale (hyperboloid samples can sit far up the sheet).
    let mut worst = 0.0f64;
    for geometry in GEOMETRIES {
        let pts: Coords<f64> = sample_positions(geometry, 5, &mut rand);
        let once = project_to_manifold(geometry, &pts).unwrap();
        let twice = project_to_manifold(geometry, &once).unwrap();
        let scale = match &once {
            Coords::Spatial(v) => v.iter().map(|p| p.max_abs()).fold(1.0, f64::max),
            Coords::Planar(v) => v.iter().map(|p| p.max_abs()).fold(1.0, f64::max),
        };
        worst = worst.max(once.max_abs_diff(&twice) / scale);
    }
    out.report(
        "projection idempotence",
        format!("relative residual {worst:.1e}"),
        worst <= 1e-15,
    );

    // Antipodal pair is a fixed point of the field.
    let r = Point3::new(0.0, 0.6, 0.8);
    let antipodal = VortexState::new(
        GeometryTag::Sphere,
        Coords::Spatial(vec![r, -r]),
        vec![1.0, 1.0],
    )
    .unwrap();
    let speed = match rhs(&antipodal, None).unwrap() {
        Coords::Spatial(v) => v.iter().map(|p| p.max_abs()).fold(0.0, f64::max),
        _ => unreachable!(),
    };
    out.report(
        "antipodal equilibrium",
        format!("max |rhs| {speed:.1e}"),
        speed <= 1e-15,
    );

    // Dipole velocity oracle (0, 1/2pi).
    let dipole = VortexState::new(
        GeometryTag::Plane,
        Coords::Planar(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
        vec![1.0, -1.0],
    )
    .unwrap();
    let expect = 1.0 / std::f64::consts::TAU;
    let err = match rhs(&dipole, None).unwrap() {
        Coords::Planar(v) => v
            .iter()
            .map(|p: &Point2<f64>| p.x.abs().max((p.y - expect).abs()))
            .fold(0.0, f64::max),
        _ => unreachable!(),
    };
    out.report(
        "dipole velocity",
        format!("error {err:.1e} vs (0, 1/2pi)"),
        err <= 1e-15,
    );

    // Sphere momentum equivariance under random rotations.
    let state = random_state(GeometryTag::Sphere, 4, 5);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let rot = random_rotation(&mut rand);
        worst = worst.max(equivariance_residual_sphere(&state, &rot).unwrap());
    }
    out.report(
        "sphere equivariance",
        format!("residual {worst:.1e}"),
        worst <= 1e-12,
    );

    // Plane equivariance defect equals its closed form.
    let state = random_state(GeometryTag::Plane, 4, 6);
    let total = circulation(&state);
    let u = Point2::new(0.8, -0.4);
    let (da, dl) = equivariance_defect_plane(&state, 1.1, u).unwrap();
    let err = (da - 0.5 * total * u.norm_squared())
        .abs()
        .max((dl - u * total).max_abs());
    out.report(
        "plane defect closed form",
        format!("error {err:.1e}"),
        err <= 1e-12,
    );

    // Torus kernel: 2pi-shift invariance and gradient vs finite differences.
    let kernel = TorusKernelSpec::default();
    let (hx, hy) = torus_kernel_grad(1.3, 0.7, &kernel).unwrap();
    let (sx, sy) = torus_kernel_grad(1.3 + std::f64::consts::TAU, 0.7, &kernel).unwrap();
    let delta = 1e-5;
    let fx = (torus_kernel(1.3 + delta, 0.7, &kernel) - torus_kernel(1.3 - delta, 0.7, &kernel))
        / (2.0 * delta);
    let fy = (torus_kernel(1.3, 0.7 + delta, &kernel) - torus_kernel(1.3, 0.7 - delta, &kernel))
        / (2.0 * delta);
    let shift_err = (hx - sx).abs().max((hy - sy).abs());
    let fd_err = (hx - fx).abs().max((hy - fy).abs()) / hx.abs().max(1.0);
    out.report(
        "torus kernel periodicity",
        format!("shift {shift_err:.1e}, fd {fd_err:.1e}"),
        shift_err <= 1e-9 && fd_err <= 1e-6,
    );

    // Time symmetry of all three steppers.
    let mut worst = 0.0f64;
    for geometry in GEOMETRIES {
        let state = random_state(geometry, 3, 7);
        let stepper = Stepper::new(
            &state,
            Method::default_for(geometry),
            SolverOptions::default(),
            None,
        )
        .unwrap();
        let forward = stepper.step(state.positions(), 1e-2).unwrap();
        let back = stepper.step(&forward, -1e-2).unwrap();
        worst = worst.max(state.positions().max_abs_diff(&back));
    }
    out.report(
        "time symmetry",
        format!("return residual {worst:.1e}"),
        worst <= 1e-11,
    );

    // Manifold preservation over 1000 steps.
    let state = random_state(GeometryTag::Sphere, 3, 8);
    let stepper = Stepper::new(
        &state,
        Method::SphericalMidpoint,
        SolverOptions::default(),
        None,
    )
    .unwrap();
    let mut positions = state.positions().clone();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        positions = stepper.step(&positions, 1e-2).unwrap();
        for p in positions.spatial().unwrap() {
            worst = worst.max((p.norm() - 1.0).abs());
        }
    }
    out.report(
        "sphere norm preservation",
        format!("residual over 1000 steps {worst:.1e}"),
        worst <= 1e-12,
    );

    println!("{} passed, {} failed", out.passed, out.failed);
    out.failed
}
