//! Crate-wide error type.

use crate::geometry::GeometryTag;
use crate::integrators::Method;

/// Errors raised by geometry primitives, vector-field evaluation, constraint
/// projection, and the implicit time steppers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("cannot project a (near-)zero vector onto the sphere")]
    ZeroVector,

    #[error("point lies outside the timelike cone of the upper hyperboloid")]
    NonTimelike,

    #[error("vortices {i} and {j} are closer than the collision threshold (separation {separation:.3e})")]
    Collision { i: usize, j: usize, separation: f64 },

    #[error("implicit solver did not converge after {iterations} iterations (last update {residual:.3e})")]
    SolverDiverged { iterations: u32, residual: f64 },

    #[error("{method:?} cannot integrate {geometry:?} states")]
    IncompatibleMethod {
        method: Method,
        geometry: GeometryTag,
    },

    #[error("matrix is not a rotation: orthogonality or orientation check failed")]
    NotARotation,

    #[error("constraint projection is infeasible: {0}")]
    Infeasible(String),

    #[error("invalid vortex state: {0}")]
    InvalidState(String),

    #[error("invalid integrator specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
