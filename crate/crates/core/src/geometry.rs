//! Embedding-space primitives for the four supported manifolds.
//!
//! The sphere and the hyperbolic plane live in `R^3`: the sphere as the unit
//! vectors, the hyperbolic plane as the upper sheet of the hyperboloid
//! `z^2 - x^2 - y^2 = 1` with the Minkowski form `a . (L b)`,
//! `L = diag(-1, -1, 1)`. The plane and the flat torus use `R^2` coordinates;
//! torus positions are tracked on the `2*pi`-periodic lift and canonicalized
//! into `[0, 2*pi)^2` only at output boundaries.

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

/// The four supported geometries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeometryTag {
    Sphere,
    Plane,
    Hyperbolic,
    Torus,
}

impl GeometryTag {
    /// True for the geometries embedded in `R^3`.
    #[inline]
    pub fn is_spatial(self) -> bool {
        matches!(self, GeometryTag::Sphere | GeometryTag::Hyperbolic)
    }

    pub fn name(self) -> &'static str {
        match self {
            GeometryTag::Sphere => "sphere",
            GeometryTag::Plane => "plane",
            GeometryTag::Hyperbolic => "hyperbolic",
            GeometryTag::Torus => "torus",
        }
    }
}

impl std::fmt::Display for GeometryTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A point (or tangent vector) in `R^3` embedding coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

/// A point (or tangent vector) in `R^2` coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

impl<T: Real> Point2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs())
    }

    /// Rotation by `+pi/2`: `(x, y) -> (-y, x)`.
    #[inline]
    pub fn rot90(self) -> Self {
        Self::new(-self.y, self.x)
    }
}

impl<T: Real> Add for Point3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Point3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Point3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Point3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Neg for Point2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Real> Mul<T> for Point2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// Minkowski bilinear form `a . (L b)` with `L = diag(-1, -1, 1)`.
#[inline]
pub fn minkowski_dot<T: Real>(a: Point3<T>, b: Point3<T>) -> T {
    -a.x * b.x - a.y * b.y + a.z * b.z
}

/// Minkowski cross product `L (a x b)`.
#[inline]
pub fn cross_l<T: Real>(a: Point3<T>, b: Point3<T>) -> Point3<T> {
    let c = a.cross(b);
    Point3::new(-c.x, -c.y, c.z)
}

/// Residual of the manifold constraint at a spatial point: `|r.r - 1|` on the
/// sphere, `|r ._L r - 1|` on the hyperboloid.
#[inline]
pub fn spatial_residual<T: Real>(geometry: GeometryTag, p: Point3<T>) -> T {
    match geometry {
        GeometryTag::Sphere => (p.norm_squared() - T::one()).abs(),
        GeometryTag::Hyperbolic => (minkowski_dot(p, p) - T::one()).abs(),
        _ => T::zero(),
    }
}

/// Radial projection onto the unit sphere.
pub fn project_unit_sphere<T: Real>(p: Point3<T>) -> Result<Point3<T>> {
    let n = p.norm();
    if !(n > T::of(1e-12)) {
        return Err(Error::ZeroVector);
    }
    Ok(p * n.recip())
}

/// Projection onto the upper hyperboloid along the Minkowski ray through `p`.
pub fn project_hyperboloid<T: Real>(p: Point3<T>) -> Result<Point3<T>> {
    let q = minkowski_dot(p, p);
    if !(q > T::zero()) || !(p.z > T::zero()) {
        return Err(Error::NonTimelike);
    }
    Ok(p * q.sqrt().recip())
}

/// Reduce a lift coordinate into the canonical interval `[0, 2*pi)`.
#[inline]
pub fn wrap_angle<T: Real>(x: T) -> T {
    let tau = T::TAU();
    let mut w = x - tau * (x / tau).floor();
    if w >= tau {
        w = w - tau;
    }
    if w < T::zero() {
        w = w + tau;
    }
    w
}

/// Canonical torus representative of a lift point.
#[inline]
pub fn wrap_torus_point<T: Real>(p: Point2<T>) -> Point2<T> {
    Point2::new(wrap_angle(p.x), wrap_angle(p.y))
}

/// Separation measure on the sphere: `1 - a.b`, zero iff the points coincide.
#[inline]
pub fn sphere_separation<T: Real>(a: Point3<T>, b: Point3<T>) -> T {
    T::one() - a.dot(b)
}

/// Separation measure on the hyperboloid: `a ._L b - 1`.
#[inline]
pub fn hyperbolic_separation<T: Real>(a: Point3<T>, b: Point3<T>) -> T {
    minkowski_dot(a, b) - T::one()
}

/// Euclidean distance on the plane.
#[inline]
pub fn plane_separation<T: Real>(a: Point2<T>, b: Point2<T>) -> T {
    (a - b).norm()
}

/// Torus distance: the minimum of `|a - b|` over the nine neighbouring period
/// images of the difference.
pub fn torus_separation<T: Real>(a: Point2<T>, b: Point2<T>) -> T {
    let tau = T::TAU();
    let dx = wrap_angle(a.x - b.x);
    let dy = wrap_angle(a.y - b.y);
    let mut best = T::infinity();
    for ix in [-1.0f64, 0.0, 1.0] {
        for iy in [-1.0f64, 0.0, 1.0] {
            let ex = dx + tau * T::of(ix);
            let ey = dy + tau * T::of(iy);
            let d2 = ex * ex + ey * ey;
            if d2 < best {
                best = d2;
            }
        }
    }
    best.sqrt()
}

/// Minimum-image displacement `a - b` on the torus, each component in
/// `[-pi, pi)` up to rounding.
pub fn torus_displacement<T: Real>(a: Point2<T>, b: Point2<T>) -> Point2<T> {
    let tau = T::TAU();
    let pi = T::PI();
    let mut dx = wrap_angle(a.x - b.x);
    let mut dy = wrap_angle(a.y - b.y);
    if dx >= pi {
        dx = dx - tau;
    }
    if dy >= pi {
        dy = dy - tau;
    }
    Point2::new(dx, dy)
}

/// Remove the component of `v` normal to the sphere at `r`.
#[inline]
pub fn tangent_project_sphere<T: Real>(r: Point3<T>, v: Point3<T>) -> Point3<T> {
    v - r * v.dot(r)
}

/// Remove the Minkowski-normal component of `v` at a hyperboloid point `r`.
#[inline]
pub fn tangent_project_hyperboloid<T: Real>(r: Point3<T>, v: Point3<T>) -> Point3<T> {
    v - r * minkowski_dot(v, r)
}

/// Per-vortex coordinates. Which variant is in use is fixed by the geometry:
/// `Spatial` for the sphere and the hyperbolic plane, `Planar` for the plane
/// and the torus.
#[derive(Clone, Debug, PartialEq)]
pub enum Coords<T> {
    Spatial(Vec<Point3<T>>),
    Planar(Vec<Point2<T>>),
}

impl<T: Real> Coords<T> {
    pub fn len(&self) -> usize {
        match self {
            Coords::Spatial(v) => v.len(),
            Coords::Planar(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spatial(&self) -> Option<&[Point3<T>]> {
        match self {
            Coords::Spatial(v) => Some(v),
            Coords::Planar(_) => None,
        }
    }

    pub fn planar(&self) -> Option<&[Point2<T>]> {
        match self {
            Coords::Planar(v) => Some(v),
            Coords::Spatial(_) => None,
        }
    }

    pub(crate) fn expect_spatial(&self) -> &[Point3<T>] {
        self.spatial().expect("spatial coordinates")
    }

    pub(crate) fn expect_planar(&self) -> &[Point2<T>] {
        self.planar().expect("planar coordinates")
    }

    /// True if the variant matches what `geometry` requires.
    pub fn matches(&self, geometry: GeometryTag) -> bool {
        matches!(self, Coords::Spatial(_)) == geometry.is_spatial()
    }

    /// Max-norm of the componentwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        match (self, other) {
            (Coords::Spatial(a), Coords::Spatial(b)) => a
                .iter()
                .zip(b)
                .map(|(p, q)| (*p - *q).max_abs())
                .fold(T::zero(), T::max),
            (Coords::Planar(a), Coords::Planar(b)) => a
                .iter()
                .zip(b)
                .map(|(p, q)| (*p - *q).max_abs())
                .fold(T::zero(), T::max),
            _ => panic!("coordinate variants differ"),
        }
    }

    /// Euclidean distance in embedding coordinates, aggregated over all
    /// vortices. On the torus the per-vortex displacement uses the minimum
    /// image, so winding numbers do not contribute.
    pub fn embedding_distance(&self, other: &Self, geometry: GeometryTag) -> T {
        match (self, other) {
            (Coords::Spatial(a), Coords::Spatial(b)) => a
                .iter()
                .zip(b)
                .map(|(p, q)| (*p - *q).norm_squared())
                .sum::<T>()
                .sqrt(),
            (Coords::Planar(a), Coords::Planar(b)) => a
                .iter()
                .zip(b)
                .map(|(p, q)| match geometry {
                    GeometryTag::Torus => torus_displacement(*p, *q).norm_squared(),
                    _ => (*p - *q).norm_squared(),
                })
                .sum::<T>()
                .sqrt(),
            _ => panic!("coordinate variants differ"),
        }
    }

    /// Separation measure between vortices `i` and `j`.
    pub fn separation(&self, geometry: GeometryTag, i: usize, j: usize) -> T {
        match self {
            Coords::Spatial(v) => match geometry {
                GeometryTag::Sphere => sphere_separation(v[i], v[j]),
                GeometryTag::Hyperbolic => hyperbolic_separation(v[i], v[j]),
                _ => panic!("spatial coordinates on a flat geometry"),
            },
            Coords::Planar(v) => match geometry {
                GeometryTag::Plane => plane_separation(v[i], v[j]),
                GeometryTag::Torus => torus_separation(v[i], v[j]),
                _ => panic!("planar coordinates on an embedded geometry"),
            },
        }
    }

    /// Smallest pairwise separation, or `+inf` for a single vortex.
    pub fn min_separation(&self, geometry: GeometryTag) -> T {
        let n = self.len();
        let mut best = T::infinity();
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.min(self.separation(geometry, i, j));
            }
        }
        best
    }

    /// Canonical torus representative; identity on the other geometries.
    pub fn canonicalized(&self, geometry: GeometryTag) -> Self {
        match (self, geometry) {
            (Coords::Planar(v), GeometryTag::Torus) => {
                Coords::Planar(v.iter().map(|p| wrap_torus_point(*p)).collect())
            }
            _ => self.clone(),
        }
    }

    /// Worst manifold-constraint residual over all vortices.
    pub fn manifold_residual(&self, geometry: GeometryTag) -> T {
        match self {
            Coords::Spatial(v) => v
                .iter()
                .map(|p| spatial_residual(geometry, *p))
                .fold(T::zero(), T::max),
            Coords::Planar(_) => T::zero(),
        }
    }
}

/// Project every point onto its manifold: radial normalization on the sphere,
/// Minkowski normalization on the hyperboloid, canonicalization on the torus,
/// identity on the plane.
pub fn project_to_manifold<T: Real>(
    geometry: GeometryTag,
    coords: &Coords<T>,
) -> Result<Coords<T>> {
    match (geometry, coords) {
        (GeometryTag::Sphere, Coords::Spatial(v)) => Ok(Coords::Spatial(
            v.iter()
                .map(|p| project_unit_sphere(*p))
                .collect::<Result<_>>()?,
        )),
        (GeometryTag::Hyperbolic, Coords::Spatial(v)) => Ok(Coords::Spatial(
            v.iter()
                .map(|p| project_hyperboloid(*p))
                .collect::<Result<_>>()?,
        )),
        (GeometryTag::Torus, Coords::Planar(v)) => Ok(Coords::Planar(
            v.iter().map(|p| wrap_torus_point(*p)).collect(),
        )),
        (GeometryTag::Plane, Coords::Planar(v)) => Ok(Coords::Planar(v.clone())),
        _ => Err(Error::InvalidState(format!(
            "coordinate variant does not match geometry {geometry}"
        ))),
    }
}

/// Draw `n` random positions for `geometry`:
/// uniform w.r.t. area on the sphere, uniform on `[0, 2*pi)^2` on the torus,
/// standard 2-D Gaussian on the plane, and on the hyperbolic plane the image
/// of a standard 2-D Gaussian in the tangent plane at `(0, 0, 1)` under the
/// exponential map `v -> cosh|v| e3 + sinh|v| (v/|v|, 0)`.
pub fn sample_positions<T: Real, R: Rng>(
    geometry: GeometryTag,
    n: usize,
    rand: &mut R,
) -> Coords<T> {
    match geometry {
        GeometryTag::Sphere => Coords::Spatial(
            (0..n)
                .map(|_| {
                    let z: T = rng::uniform_symmetric(rand);
                    let theta: T = rng::uniform_angle(rand);
                    let r = (T::one() - z * z).max(T::zero()).sqrt();
                    Point3::new(r * theta.cos(), r * theta.sin(), z)
                })
                .collect(),
        ),
        GeometryTag::Plane => Coords::Planar(
            (0..n)
                .map(|_| Point2::new(rng::standard_normal(rand), rng::standard_normal(rand)))
                .collect(),
        ),
        GeometryTag::Torus => Coords::Planar(
            (0..n)
                .map(|_| Point2::new(rng::uniform_angle(rand), rng::uniform_angle(rand)))
                .collect(),
        ),
        GeometryTag::Hyperbolic => Coords::Spatial(
            (0..n)
                .map(|_| {
                    let gx: T = rng::standard_normal(rand);
                    let gy: T = rng::standard_normal(rand);
                    let rho = (gx * gx + gy * gy).sqrt();
                    if rho < T::of(1e-300) {
                        Point3::new(T::zero(), T::zero(), T::one())
                    } else {
                        let s = rho.sinh() / rho;
                        Point3::new(gx * s, gy * s, rho.cosh())
                    }
                })
                .collect(),
        ),
    }
}

/// A 3x3 matrix in row-major order; used for rotations of the sphere and
/// Minkowski isometries of the hyperboloid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T> {
    pub rows: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        let o = T::one();
        let z = T::zero();
        Self {
            rows: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn apply(&self, p: Point3<T>) -> Point3<T> {
        let r = &self.rows;
        Point3::new(
            r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z,
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z,
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z,
        )
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut rows = [[T::zero(); 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc = T::zero();
                for k in 0..3 {
                    acc += self.rows[i][k] * other.rows[k][j];
                }
                *cell = acc;
            }
        }
        Self { rows }
    }

    pub fn det(&self) -> T {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Orthogonality and orientation check: `R^T R = I` within `tol` and
    /// `det R` within `tol` of `+1`.
    pub fn is_rotation(&self, tol: T) -> bool {
        let gram = self.transpose().matmul(self);
        let eye = Self::identity();
        let mut err = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                err = err.max((gram.rows[i][j] - eye.rows[i][j]).abs());
            }
        }
        err <= tol && (self.det() - T::one()).abs() <= tol
    }

    /// Rotation by `theta` in the x-y plane (about the z axis).
    pub fn rotation_xy(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        let z = T::zero();
        let o = T::one();
        Self {
            rows: [[c, -s, z], [s, c, z], [z, z, o]],
        }
    }

    /// Minkowski boost of rapidity `a` in the x-z plane.
    pub fn boost_xz(a: T) -> Self {
        let (ch, sh) = (a.cosh(), a.sinh());
        let z = T::zero();
        let o = T::one();
        Self {
            rows: [[ch, z, sh], [z, o, z], [sh, z, ch]],
        }
    }

    /// Minkowski boost of rapidity `a` in the y-z plane.
    pub fn boost_yz(a: T) -> Self {
        let (ch, sh) = (a.cosh(), a.sinh());
        let z = T::zero();
        let o = T::one();
        Self {
            rows: [[o, z, z], [z, ch, sh], [z, sh, ch]],
        }
    }
}

/// A rotation drawn uniformly from SO(3), via a normalized random quaternion.
pub fn random_rotation<T: Real, R: Rng>(rand: &mut R) -> Mat3<T> {
    let (w, x, y, z) = loop {
        let w: T = rng::standard_normal(rand);
        let x: T = rng::standard_normal(rand);
        let y: T = rng::standard_normal(rand);
        let z: T = rng::standard_normal(rand);
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n > T::of(1e-6) {
            break (w / n, x / n, y / n, z / n);
        }
    };
    let two = T::of(2.0);
    let o = T::one();
    Mat3 {
        rows: [
            [
                o - two * (y * y + z * z),
                two * (x * y - w * z),
                two * (x * z + w * y),
            ],
            [
                two * (x * y + w * z),
                o - two * (x * x + z * z),
                two * (y * z - w * x),
            ],
            [
                two * (x * z - w * y),
                two * (y * z + w * x),
                o - two * (x * x + y * y),
            ],
        ],
    }
}
