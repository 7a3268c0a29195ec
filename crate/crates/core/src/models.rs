//! Hamiltonians, interaction kernels, and the point-vortex vector fields.
//!
//! Energies use the pair kernels
//! `-(1/4pi) log(1 - r.r')` (sphere), `-(1/4pi) log|r - r'|^2` (plane),
//! `-(1/4pi) log((r ._L r' + 1)/(r ._L r' - 1))` (hyperbolic plane), and
//! `-(1/4pi) h(x - x', y - y')` (flat torus), summed over ordered pairs. The
//! vector fields are the corresponding Hamiltonian flows, evaluated directly
//! from their closed forms; the torus field is the exact skew gradient of the
//! truncated kernel `h`, including the `-x^2/(2pi)` drift term.

use crate::error::{Error, Result};
use crate::geometry::{
    cross_l, minkowski_dot, torus_separation, Coords, GeometryTag, Point2, Point3,
};
use crate::scalar::Real;

/// Pair-separation threshold below which evaluation fails with
/// [`Error::Collision`], in the geometry's own separation measure.
pub const COLLISION_THRESHOLD: f64 = 1e-8;

#[inline]
fn eps_coll<T: Real>() -> T {
    T::of(COLLISION_THRESHOLD)
}

/// Truncation of the torus kernel's image sum: `m` ranges over `[-M, M]`.
///
/// The terms decay like `exp(-2*pi*|m|)`, so the default `M = 10` carries a
/// tail below `1e-26` relative to an `M = 50` reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusKernelSpec {
    pub truncation: u32,
}

impl TorusKernelSpec {
    pub fn new(truncation: u32) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::InvalidSpec("torus truncation must be >= 1".into()));
        }
        Ok(Self { truncation })
    }
}

impl Default for TorusKernelSpec {
    fn default() -> Self {
        Self { truncation: 10 }
    }
}

/// `log(cosh u - cos y)` in overflow-safe form, valid for any `u`.
#[inline]
fn ln_cosh_minus_cos<T: Real>(u: T, cos_y: T) -> T {
    let a = u.abs();
    let q = (-a).exp();
    a - T::LN_2() + (q * q - (q + q) * cos_y).ln_1p()
}

/// `log(cosh k)` in overflow-safe form.
#[inline]
fn ln_cosh<T: Real>(k: T) -> T {
    let a = k.abs();
    a - T::LN_2() + (-(a + a)).exp().ln_1p()
}

/// The doubly periodic interaction kernel
/// `h(x, y) = -x^2/(2pi) + sum_m log((cosh(x - 2pi m) - cos y)/cosh(2pi m))`
/// with the image sum truncated to `|m| <= M`.
///
/// Callers must keep `(x, y)` away from `(0, 0) mod 2pi`; the kernel is
/// logarithmically singular there.
pub fn torus_kernel<T: Real>(x: T, y: T, spec: &TorusKernelSpec) -> T {
    let tau = T::TAU();
    let cos_y = y.cos();
    let mut sum = -x * x / tau;
    let m_max = spec.truncation as i64;
    for m in -m_max..=m_max {
        let shift = tau * T::of(m as f64);
        sum += ln_cosh_minus_cos(x - shift, cos_y) - ln_cosh(shift);
    }
    sum
}

/// Gradient of [`torus_kernel`] at `(dx, dy)`, truncated to `|m| <= M`:
///
/// `dh/dx = -dx/pi + sum_m sinh(dx - 2pi m) / (cosh(dx - 2pi m) - cos dy)`
/// `dh/dy =          sum_m sin dy            / (cosh(dx - 2pi m) - cos dy)`
pub fn torus_kernel_grad<T: Real>(dx: T, dy: T, spec: &TorusKernelSpec) -> Result<(T, T)> {
    let sep = torus_separation(Point2::new(dx, dy), Point2::zero());
    if sep < eps_coll() {
        return Err(Error::Collision {
            i: 0,
            j: 0,
            separation: sep.as_f64(),
        });
    }
    let tau = T::TAU();
    let cos_y = dy.cos();
    let sin_y = dy.sin();
    let one = T::one();
    let mut hx = -dx / T::PI();
    let mut hy = T::zero();
    let m_max = spec.truncation as i64;
    for m in -m_max..=m_max {
        let u = dx - tau * T::of(m as f64);
        let q = (-u.abs()).exp();
        // cosh u - cos y = e^{|u|} (1 + q^2 - 2 q cos y) / 2
        let denom = one + q * q - (q + q) * cos_y;
        hx += u.signum() * (one - q * q) / denom;
        hy += (q + q) * sin_y / denom;
    }
    Ok((hx, hy))
}

/// A configuration of `N >= 1` point vortices: positions on one of the four
/// geometries plus nonzero strengths.
#[derive(Clone, Debug, PartialEq)]
pub struct VortexState<T> {
    geometry: GeometryTag,
    positions: Coords<T>,
    strengths: Vec<T>,
}

impl<T: Real> VortexState<T> {
    /// Validating constructor: requires at least one vortex, nonzero
    /// strengths, coordinates of the variant matching the geometry that
    /// satisfy the manifold constraint to `1e-12`, and pairwise-distinct
    /// positions.
    pub fn new(geometry: GeometryTag, positions: Coords<T>, strengths: Vec<T>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidState("need at least one vortex".into()));
        }
        if positions.len() != strengths.len() {
            return Err(Error::InvalidState(format!(
                "{} positions but {} strengths",
                positions.len(),
                strengths.len()
            )));
        }
        if strengths.iter().any(|g| *g == T::zero() || !g.is_finite()) {
            return Err(Error::InvalidState(
                "vortex strengths must be finite and nonzero".into(),
            ));
        }
        if !positions.matches(geometry) {
            return Err(Error::InvalidState(format!(
                "coordinate variant does not match geometry {geometry}"
            )));
        }
        let residual = positions.manifold_residual(geometry);
        if residual > T::of(1e-12) {
            return Err(Error::InvalidState(format!(
                "positions violate the {geometry} constraint (residual {:.3e})",
                residual.as_f64()
            )));
        }
        let n = positions.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if !(positions.separation(geometry, i, j) > T::zero()) {
                    return Err(Error::InvalidState(format!(
                        "vortices {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Self {
            geometry,
            positions,
            strengths,
        })
    }

    /// Constructor for internal call sites that already guarantee validity
    /// (e.g. freshly projected integrator output).
    pub(crate) fn from_parts_unchecked(
        geometry: GeometryTag,
        positions: Coords<T>,
        strengths: Vec<T>,
    ) -> Self {
        debug_assert!(positions.matches(geometry));
        debug_assert_eq!(positions.len(), strengths.len());
        Self {
            geometry,
            positions,
            strengths,
        }
    }

    #[inline]
    pub fn geometry(&self) -> GeometryTag {
        self.geometry
    }

    #[inline]
    pub fn positions(&self) -> &Coords<T> {
        &self.positions
    }

    #[inline]
    pub fn strengths(&self) -> &[T] {
        &self.strengths
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.strengths.len()
    }

    pub fn min_separation(&self) -> T {
        self.positions.min_separation(self.geometry)
    }

    /// Same strengths, new positions (validated).
    pub fn with_positions(&self, positions: Coords<T>) -> Result<Self> {
        Self::new(self.geometry, positions, self.strengths.clone())
    }

    /// Same positions, new strengths (validated).
    pub fn with_strengths(&self, strengths: Vec<T>) -> Result<Self> {
        Self::new(self.geometry, self.positions.clone(), strengths)
    }

    /// Error out if any pair sits below the collision threshold.
    pub fn collision_check(&self) -> Result<()> {
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                let sep = self.positions.separation(self.geometry, i, j);
                if sep < eps_coll() {
                    return Err(Error::Collision {
                        i,
                        j,
                        separation: sep.as_f64(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn pair_collision<T: Real>(sep: T, i: usize, j: usize) -> Result<()> {
    if sep < eps_coll() {
        Err(Error::Collision {
            i,
            j,
            separation: sep.as_f64(),
        })
    } else {
        Ok(())
    }
}

/// Total interaction energy of the configuration. `kernel` selects the torus
/// truncation and defaults to `M = 10`; it is ignored on other geometries.
pub fn hamiltonian<T: Real>(state: &VortexState<T>, kernel: Option<&TorusKernelSpec>) -> Result<T> {
    hamiltonian_at(
        state.geometry(),
        state.positions(),
        state.strengths(),
        kernel,
    )
}

/// Energy at arbitrary coordinates. The pair kernels extend smoothly off the
/// manifold, which is what finite-difference probes rely on; positions are
/// not required to satisfy the manifold constraint here.
pub fn hamiltonian_at<T: Real>(
    geometry: GeometryTag,
    positions: &Coords<T>,
    strengths: &[T],
    kernel: Option<&TorusKernelSpec>,
) -> Result<T> {
    let g = strengths;
    let n = positions.len();
    // -(1/4pi) over ordered pairs = -(1/2pi) over unordered pairs.
    let coef = -(T::of(2.0) * T::PI()).recip();
    let mut sum = T::zero();
    match (geometry, positions) {
        (GeometryTag::Sphere, Coords::Spatial(r)) => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let sep = T::one() - r[i].dot(r[j]);
                    pair_collision(sep, i, j)?;
                    sum += g[i] * g[j] * sep.ln();
                }
            }
        }
        (GeometryTag::Plane, Coords::Planar(r)) => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let d2 = (r[i] - r[j]).norm_squared();
                    pair_collision(d2.sqrt(), i, j)?;
                    sum += g[i] * g[j] * d2.ln();
                }
            }
        }
        (GeometryTag::Hyperbolic, Coords::Spatial(r)) => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let s = minkowski_dot(r[i], r[j]);
                    pair_collision(s - T::one(), i, j)?;
                    sum += g[i] * g[j] * ((s + T::one()) / (s - T::one())).ln();
                }
            }
        }
        (GeometryTag::Torus, Coords::Planar(r)) => {
            let spec = kernel.copied().unwrap_or_default();
            for i in 0..n {
                for j in (i + 1)..n {
                    pair_collision(torus_separation(r[i], r[j]), i, j)?;
                    let d = r[i] - r[j];
                    sum += g[i] * g[j] * torus_kernel(d.x, d.y, &spec);
                }
            }
        }
        _ => {
            return Err(Error::InvalidState(format!(
                "coordinate variant does not match geometry {geometry}"
            )))
        }
    }
    Ok(coef * sum)
}

/// Ambient (embedding-space) gradient of the energy with respect to each
/// position. Used for directional-derivative checks of the vector fields.
pub fn energy_gradient<T: Real>(
    state: &VortexState<T>,
    kernel: Option<&TorusKernelSpec>,
) -> Result<Coords<T>> {
    let g = state.strengths();
    let n = state.n();
    let pi = T::PI();
    match (state.geometry(), state.positions()) {
        (GeometryTag::Sphere, Coords::Spatial(r)) => {
            let coef = (T::of(2.0) * pi).recip();
            let mut out = vec![Point3::zero(); n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let sep = T::one() - r[i].dot(r[j]);
                    pair_collision(sep, i, j)?;
                    let w = g[i] * g[j] * coef / sep;
                    out[i] = out[i] + r[j] * w;
                    out[j] = out[j] + r[i] * w;
                }
            }
            Ok(Coords::Spatial(out))
        }
        (GeometryTag::Plane, Coords::Planar(r)) => {
            let coef = -pi.recip();
            let mut out = vec![Point2::zero(); n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = r[i] - r[j];
                    let d2 = d.norm_squared();
                    pair_collision(d2.sqrt(), i, j)?;
                    let w = g[i] * g[j] * coef / d2;
                    out[i] = out[i] + d * w;
                    out[j] = out[j] - d * w;
                }
            }
            Ok(Coords::Planar(out))
        }
        (GeometryTag::Hyperbolic, Coords::Spatial(r)) => {
            let coef = pi.recip();
            let mut out = vec![Point3::zero(); n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let s = minkowski_dot(r[i], r[j]);
                    pair_collision(s - T::one(), i, j)?;
                    let w = g[i] * g[j] * coef / (s * s - T::one());
                    let lrj = Point3::new(-r[j].x, -r[j].y, r[j].z);
                    let lri = Point3::new(-r[i].x, -r[i].y, r[i].z);
                    out[i] = out[i] + lrj * w;
                    out[j] = out[j] + lri * w;
                }
            }
            Ok(Coords::Spatial(out))
        }
        (GeometryTag::Torus, Coords::Planar(r)) => {
            let spec = kernel.copied().unwrap_or_default();
            let coef = -(T::of(2.0) * pi).recip();
            let mut out = vec![Point2::zero(); n];
            for i in 0..n {
                for j in (i + 1)..n {
                    pair_collision(torus_separation(r[i], r[j]), i, j)?;
                    let d = r[i] - r[j];
                    let (hx, hy) = torus_kernel_grad(d.x, d.y, &spec)?;
                    let grad = Point2::new(hx, hy) * (g[i] * g[j] * coef);
                    out[i] = out[i] + grad;
                    out[j] = out[j] - grad;
                }
            }
            Ok(Coords::Planar(out))
        }
        _ => unreachable!("state constructors enforce matching variants"),
    }
}

/// Point-vortex field on the sphere:
/// `dr_i/dt = (1/2pi) sum_{j != i} G_j (r_i x r_j) / (1 - r_i . r_j)`.
pub fn rhs_sphere<T: Real>(positions: &[Point3<T>], strengths: &[T]) -> Result<Vec<Point3<T>>> {
    let n = positions.len();
    let coef = (T::of(2.0) * T::PI()).recip();
    let mut out = vec![Point3::zero(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let sep = T::one() - positions[i].dot(positions[j]);
            pair_collision(sep, i, j)?;
            let c = positions[i].cross(positions[j]) * (coef / sep);
            out[i] = out[i] + c * strengths[j];
            out[j] = out[j] - c * strengths[i];
        }
    }
    Ok(out)
}

/// Point-vortex field on the plane:
/// `dx_i/dt = -(1/2pi) sum G_j (y_i - y_j)/|r_i - r_j|^2`,
/// `dy_i/dt = +(1/2pi) sum G_j (x_i - x_j)/|r_i - r_j|^2`.
pub fn rhs_plane<T: Real>(positions: &[Point2<T>], strengths: &[T]) -> Result<Vec<Point2<T>>> {
    let n = positions.len();
    let coef = (T::of(2.0) * T::PI()).recip();
    let mut out = vec![Point2::zero(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = positions[i] - positions[j];
            let d2 = d.norm_squared();
            pair_collision(d2.sqrt(), i, j)?;
            let w = d.rot90() * (coef / d2);
            out[i] = out[i] + w * strengths[j];
            out[j] = out[j] - w * strengths[i];
        }
    }
    Ok(out)
}

/// Point-vortex field on the hyperbolic plane:
/// `dr_i/dt = -(1/pi) sum_{j != i} G_j (r_i x_L r_j) / ((r_i ._L r_j)^2 - 1)`.
pub fn rhs_hyperbolic<T: Real>(positions: &[Point3<T>], strengths: &[T]) -> Result<Vec<Point3<T>>> {
    let n = positions.len();
    let coef = -T::PI().recip();
    let mut out = vec![Point3::zero(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = minkowski_dot(positions[i], positions[j]);
            pair_collision(s - T::one(), i, j)?;
            let c = cross_l(positions[i], positions[j]) * (coef / (s * s - T::one()));
            out[i] = out[i] + c * strengths[j];
            out[j] = out[j] - c * strengths[i];
        }
    }
    Ok(out)
}

/// Point-vortex field on the flat torus, evaluated in lift coordinates as the
/// skew gradient of the truncated kernel:
/// `dr_i/dt = -(1/2pi) sum_{j != i} G_j (h_y, -h_x)(r_i - r_j)`.
pub fn rhs_torus<T: Real>(
    positions: &[Point2<T>],
    strengths: &[T],
    kernel: &TorusKernelSpec,
) -> Result<Vec<Point2<T>>> {
    let n = positions.len();
    let coef = -(T::of(2.0) * T::PI()).recip();
    let mut out = vec![Point2::zero(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            pair_collision(torus_separation(positions[i], positions[j]), i, j)?;
            let d = positions[i] - positions[j];
            let (hx, hy) = torus_kernel_grad(d.x, d.y, kernel)?;
            let w = Point2::new(hy, -hx) * coef;
            out[i] = out[i] + w * strengths[j];
            out[j] = out[j] - w * strengths[i];
        }
    }
    Ok(out)
}

/// Geometry dispatch over the four fields above.
pub fn rhs<T: Real>(state: &VortexState<T>, kernel: Option<&TorusKernelSpec>) -> Result<Coords<T>> {
    let g = state.strengths();
    match (state.geometry(), state.positions()) {
        (GeometryTag::Sphere, Coords::Spatial(r)) => Ok(Coords::Spatial(rhs_sphere(r, g)?)),
        (GeometryTag::Plane, Coords::Planar(r)) => Ok(Coords::Planar(rhs_plane(r, g)?)),
        (GeometryTag::Hyperbolic, Coords::Spatial(r)) => Ok(Coords::Spatial(rhs_hyperbolic(r, g)?)),
        (GeometryTag::Torus, Coords::Planar(r)) => {
            let spec = kernel.copied().unwrap_or_default();
            Ok(Coords::Planar(rhs_torus(r, g, &spec)?))
        }
        _ => unreachable!("state constructors enforce matching variants"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{project_hyperboloid, sample_positions};
    use std::f64::consts::{PI, TAU};

    fn sphere_state(points: &[[f64; 3]], strengths: &[f64]) -> VortexState<f64> {
        VortexState::new(
            GeometryTag::Sphere,
            Coords::Spatial(
                points
                    .iter()
                    .map(|p| Point3::new(p[0], p[1], p[2]))
                    .collect(),
            ),
            strengths.to_vec(),
        )
        .unwrap()
    }

    fn plane_state(points: &[[f64; 2]], strengths: &[f64]) -> VortexState<f64> {
        VortexState::new(
            GeometryTag::Plane,
            Coords::Planar(points.iter().map(|p| Point2::new(p[0], p[1])).collect()),
            strengths.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn state_validation() {
        assert!(matches!(
            VortexState::<f64>::new(GeometryTag::Plane, Coords::Planar(vec![]), vec![]),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            VortexState::new(
                GeometryTag::Plane,
                Coords::Planar(vec![Point2::new(0.0, 0.0)]),
                vec![0.0]
            ),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            VortexState::new(
                GeometryTag::Sphere,
                Coords::Spatial(vec![Point3::new(0.0, 0.0, 2.0)]),
                vec![1.0]
            ),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn hamiltonian_trivial_values() {
        let single = sphere_state(&[[0.0, 0.0, 1.0]], &[1.5]);
        assert_eq!(hamiltonian(&single, None).unwrap(), 0.0);

        let orthogonal = sphere_state(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], &[1.0, 1.0]);
        assert_eq!(hamiltonian(&orthogonal, None).unwrap(), 0.0);
    }

    #[test]
    fn hamiltonian_plane_values() {
        let unit_dipole = plane_state(&[[0.0, 0.0], [1.0, 0.0]], &[1.0, -1.0]);
        assert_eq!(hamiltonian(&unit_dipole, None).unwrap(), 0.0);

        // Distance e^{1/2}: H = -(1/4pi) * 2 * (1 * -1) * log(e) = 1/(2pi).
        let d = 0.5_f64.exp();
        let stretched = plane_state(&[[0.0, 0.0], [d, 0.0]], &[1.0, -1.0]);
        let h = hamiltonian(&stretched, None).unwrap();
        assert!((h - 1.0 / TAU).abs() < 1e-15, "H = {h}");
    }

    #[test]
    fn hamiltonian_collision_detection() {
        let close = plane_state(&[[0.0, 0.0], [5e-9, 0.0]], &[1.0, 1.0]);
        assert!(matches!(
            hamiltonian(&close, None),
            Err(Error::Collision { i: 0, j: 1, .. })
        ));
    }

    #[test]
    fn rhs_sphere_orthogonal_pair() {
        let r = [Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        let v = rhs_sphere(&r, &[1.0, 1.0]).unwrap();
        let expect = 1.0 / TAU;
        assert!((v[0].z - expect).abs() < 1e-16 && v[0].x == 0.0 && v[0].y == 0.0);
        assert!((v[1].z + expect).abs() < 1e-16 && v[1].x == 0.0 && v[1].y == 0.0);
    }

    #[test]
    fn rhs_sphere_antipodal_equilibrium() {
        let raw = Point3::new(0.6, -0.48, 0.64);
        let r = raw * (1.0 / raw.norm());
        let v = rhs_sphere(&[r, -r], &[2.0, 2.0]).unwrap();
        assert_eq!(v[0], Point3::zero());
        assert_eq!(v[1], Point3::zero());
        let single = rhs_sphere(&[r], &[1.0]).unwrap();
        assert_eq!(single[0], Point3::zero());
    }

    #[test]
    fn rhs_plane_dipole_translates() {
        let v = rhs_plane(
            &[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)],
            &[1.0, -1.0],
        )
        .unwrap();
        let expect = Point2::new(0.0, 1.0 / TAU);
        assert!((v[0] - expect).max_abs() < 1e-16);
        assert!((v[1] - expect).max_abs() < 1e-16);
    }

    #[test]
    fn rhs_plane_like_pair_rotates() {
        let v = rhs_plane(
            &[Point2::new(0.5, 0.0), Point2::new(-0.5, 0.0)],
            &[1.0, 1.0],
        )
        .unwrap();
        assert!((v[0].y - 1.0 / TAU).abs() < 1e-16 && v[0].x == 0.0);
        assert!((v[1].y + 1.0 / TAU).abs() < 1e-16 && v[1].x == 0.0);
        assert_eq!(
            rhs_plane(&[Point2::new(3.0, 4.0)], &[2.0]).unwrap()[0],
            Point2::zero()
        );
    }

    #[test]
    fn rhs_hyperbolic_mirror_symmetry() {
        let a = project_hyperboloid(Point3::new(0.7, 0.4, (1.0f64 + 0.49 + 0.16).sqrt())).unwrap();
        let b = Point3::new(-a.x, a.y, a.z);
        let v = rhs_hyperbolic(&[a, b], &[1.3, 1.3]).unwrap();
        // The configuration is fixed by the orientation-reversing isometry
        // diag(-1,1,1) composed with the swap, so v2 = (v1.x, -v1.y, -v1.z).
        let mirrored = Point3::new(v[0].x, -v[0].y, -v[0].z);
        assert!((v[1] - mirrored).max_abs() < 1e-15);
        assert!((v[0].norm() - v[1].norm()).abs() < 1e-15);
    }

    #[test]
    fn rhs_tangency() {
        let mut rand = crate::rng::stream(5, 0);
        let pts: Coords<f64> = sample_positions(GeometryTag::Sphere, 4, &mut rand);
        let r = pts.spatial().unwrap();
        let v = rhs_sphere(r, &[1.0, -0.5, 2.0, 0.7]).unwrap();
        for (p, w) in r.iter().zip(&v) {
            assert!(p.dot(*w).abs() <= 1e-14);
        }
        let pts: Coords<f64> = sample_positions(GeometryTag::Hyperbolic, 4, &mut rand);
        let r = pts.spatial().unwrap();
        let v = rhs_hyperbolic(r, &[1.0, -0.5, 2.0, 0.7]).unwrap();
        for (p, w) in r.iter().zip(&v) {
            assert!(minkowski_dot(*p, *w).abs() <= 1e-13);
        }
    }

    #[test]
    fn torus_kernel_grad_even_row() {
        let spec = TorusKernelSpec::default();
        for dx in [0.5f64, 1.0, 3.0, -2.2] {
            let (_, hy) = torus_kernel_grad(dx, 0.0, &spec).unwrap();
            assert_eq!(hy, 0.0, "dh/dy must vanish on the y = 0 line");
        }
    }

    #[test]
    fn torus_kernel_grad_periodicity() {
        let spec = TorusKernelSpec::default();
        let oracle = TorusKernelSpec::new(50).unwrap();
        for (dx, dy) in [(0.7f64, 1.1f64), (2.9, -0.4), (-1.3, 2.0), (0.05, 0.02)] {
            let (hx, hy) = torus_kernel_grad(dx, dy, &spec).unwrap();
            let (sx, sy) = torus_kernel_grad(dx + TAU, dy, &spec).unwrap();
            assert!((hx - sx).abs() < 1e-9, "hx shift mismatch at ({dx},{dy})");
            assert!((hy - sy).abs() < 1e-9, "hy shift mismatch at ({dx},{dy})");
            let (ox, oy) = torus_kernel_grad(dx, dy, &oracle).unwrap();
            assert!((hx - ox).abs() < 1e-9 && (hy - oy).abs() < 1e-9);
        }
    }

    #[test]
    fn torus_kernel_grad_matches_finite_differences() {
        let spec = TorusKernelSpec::default();
        let delta = 1e-5;
        for (x, y) in [(0.9f64, 0.7f64), (2.0, 2.8), (-1.1, 0.3), (3.1, -2.5)] {
            let (hx, hy) = torus_kernel_grad(x, y, &spec).unwrap();
            let fx = (torus_kernel(x + delta, y, &spec) - torus_kernel(x - delta, y, &spec))
                / (2.0 * delta);
            let fy = (torus_kernel(x, y + delta, &spec) - torus_kernel(x, y - delta, &spec))
                / (2.0 * delta);
            let scale = hx.abs().max(hy.abs()).max(1.0);
            assert!((hx - fx).abs() / scale < 1e-6, "hx {hx} vs fd {fx}");
            assert!((hy - fy).abs() / scale < 1e-6, "hy {hy} vs fd {fy}");
        }
    }

    #[test]
    fn torus_kernel_collision_guard() {
        let spec = TorusKernelSpec::default();
        assert!(matches!(
            torus_kernel_grad(TAU, 1e-10, &spec),
            Err(Error::Collision { .. })
        ));
        assert!(torus_kernel_grad(PI, 0.0, &spec).is_ok());
    }

    #[test]
    fn rhs_torus_dipole_translates() {
        let spec = TorusKernelSpec::default();
        let r = [Point2::new(1.0, 2.0), Point2::new(2.4, 3.3)];
        let v = rhs_torus(&r, &[1.0, -1.0], &spec).unwrap();
        assert!(
            (v[0] - v[1]).max_abs() < 1e-13,
            "dipole must translate rigidly"
        );
        assert_eq!(
            rhs_torus(&[Point2::new(0.3, 0.4)], &[1.0], &spec).unwrap()[0],
            Point2::zero()
        );
    }

    #[test]
    fn rhs_torus_lift_shift_invariance() {
        let spec = TorusKernelSpec::default();
        let r = [
            Point2::new(0.4, 1.9),
            Point2::new(3.0, 0.6),
            Point2::new(5.1, 4.0),
        ];
        let g = [1.0, -0.7, 0.4];
        let base = rhs_torus(&r, &g, &spec).unwrap();

        let all_shifted: Vec<_> = r.iter().map(|p| *p + Point2::new(TAU, 0.0)).collect();
        let v = rhs_torus(&all_shifted, &g, &spec).unwrap();
        for (a, b) in base.iter().zip(&v) {
            assert!((*a - *b).max_abs() < 1e-9);
        }

        let mut one_shifted = r;
        one_shifted[1] = one_shifted[1] + Point2::new(-TAU, TAU);
        let v = rhs_torus(&one_shifted, &g, &spec).unwrap();
        for (a, b) in base.iter().zip(&v) {
            assert!(
                (*a - *b).max_abs() < 1e-9,
                "lift representative must not matter"
            );
        }
    }

    #[test]
    fn rhs_dispatch() {
        let antipodal = sphere_state(&[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], &[1.0, 1.0]);
        match rhs(&antipodal, None).unwrap() {
            Coords::Spatial(v) => assert!(v.iter().all(|p| *p == Point3::zero())),
            _ => unreachable!(),
        }
        let single = plane_state(&[[0.0, 0.0]], &[1.0]);
        match rhs(&single, None).unwrap() {
            Coords::Planar(v) => assert_eq!(v[0], Point2::zero()),
            _ => unreachable!(),
        }
    }
}
