//! Point-vortex dynamics on four constant-curvature geometries: the sphere,
//! the Euclidean plane, the hyperbolic plane (hyperboloid model), and the
//! flat torus.
//!
//! The crate provides the interaction Hamiltonians and their vector fields
//! ([`models`]), momentum maps and constraint projections ([`conserved`]),
//! structure-preserving implicit midpoint integrators ([`integrators`]), and
//! trajectory diagnostics such as conservation drift, relative-equilibrium
//! residuals, and a two-trajectory separation exponent ([`analysis`]).
//!
//! Everything numerical is generic over the scalar type through
//! [`scalar::Real`]; the `*64` aliases below fix `f64`, which is what the
//! command-line front end uses.

pub mod analysis;
pub mod conserved;
pub mod error;
pub mod geometry;
pub mod integrators;
pub mod models;
pub mod rng;
pub mod scalar;

pub use analysis::{ClassificationReport, DriftReport, Quantity, Verdict};
pub use conserved::{ConservedSet, MomentumMap};
pub use error::{Error, Result};
pub use geometry::{Coords, GeometryTag, Mat3, Point2, Point3};
pub use integrators::{IntegratorSpec, Method, RunStatus, SolverOptions, Stepper, Trajectory};
pub use models::{TorusKernelSpec, VortexState, COLLISION_THRESHOLD};
pub use scalar::Real;

/// `f64` aliases for the core types.
pub type Point3d = Point3<f64>;
pub type Point2d = Point2<f64>;
pub type VortexState64 = VortexState<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type ConservedSet64 = ConservedSet<f64>;
pub type IntegratorSpec64 = IntegratorSpec<f64>;
pub type ClassificationReport64 = ClassificationReport<f64>;
