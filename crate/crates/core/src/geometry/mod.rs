//! Closed convex bodies `K` in R^d, nearest-point projection, the distance
//! field `d(x) = dist(x, K)` on the complement and checks of its curvature
//! and convexity.

mod checks;
mod infinity;
pub mod polytope;

pub use checks::{check_suite, GeometryChecks};
pub use infinity::{dimension_at_infinity, estimate_dimension_at_infinity, DimensionAtInfinity};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dist, dot, gram_schmidt, norm, orthonormal_complement, scale, sub};
use crate::sampling::stream_rng;

/// A single constraint `normal . x <= offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceRow {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Closed convex body. Serialized as `{"kind": "...", ...}`.
///
/// Halfspace and polytope normals need not be unit length; they are
/// normalised on use. Box bounds may be infinite, encoded in JSON as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexBody {
    SinglePoint {
        point: Vec<f64>,
    },
    AffineSubspace {
        offset: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    #[serde(rename = "h_polytope")]
    HPolytope {
        halfspaces: Vec<HalfspaceRow>,
    },
    #[serde(rename = "v_polytope")]
    VPolytope {
        vertices: Vec<Vec<f64>>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        #[serde(with = "lower_bounds")]
        lower: Vec<f64>,
        #[serde(with = "upper_bounds")]
        upper: Vec<f64>,
    },
}

/// Nearest point together with the dimension of the face of `K` it lies on
/// (for bodies where that is meaningful).
#[derive(Debug, Clone)]
pub struct Projection {
    pub point: Vec<f64>,
    pub face_dim: Option<usize>,
}

/// Affine hull `origin + span(basis)` with an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineHull {
    pub origin: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

/// Dimensional data of a body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub d: usize,
    pub k: usize,
    pub d_h: usize,
    pub k_inf: DimensionAtInfinity,
}

impl GeometryReport {
    pub fn for_body(body: &ConvexBody) -> Result<Self> {
        body.validate()?;
        let d = body.ambient_dim();
        let k = body.dim()?;
        let d_h = if k < d { k } else { d - 1 };
        let k_inf = match body.exact_dimension_at_infinity()? {
            Some(e) => DimensionAtInfinity::exact(e),
            None => estimate_dimension_at_infinity(body, &default_radii(), 20_000, 0)?,
        };
        Ok(Self { d, k, d_h, k_inf })
    }
}

/// Log-spaced radii 10^1 .. 10^4.
pub fn default_radii() -> Vec<f64> {
    (0..=12).map(|i| 10f64.powf(1.0 + i as f64 * 0.25)).collect()
}

fn normalized(v: &[f64]) -> (Vec<f64>, f64) {
    let n = norm(v);
    (scale(v, 1.0 / n), n)
}

impl ConvexBody {
    pub fn ambient_dim(&self) -> usize {
        match self {
            ConvexBody::SinglePoint { point } => point.len(),
            ConvexBody::AffineSubspace { offset, .. } => offset.len(),
            ConvexBody::Halfspace { normal, .. } => normal.len(),
            ConvexBody::HPolytope { halfspaces } => halfspaces.first().map_or(0, |h| h.normal.len()),
            ConvexBody::VPolytope { vertices } => vertices.first().map_or(0, |v| v.len()),
            ConvexBody::Ball { center, .. } => center.len(),
            ConvexBody::Box { lower, .. } => lower.len(),
        }
    }

    /// Checks structural invariants: consistent dimensions, positive radius,
    /// orthonormal basis, nonempty body that is not all of R^d.
    pub fn validate(&self) -> Result<()> {
        let d = self.ambient_dim();
        if d == 0 {
            return Err(Error::InvalidBody("ambient dimension must be at least 1".into()));
        }
        let check = |v: &[f64]| -> Result<()> {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidBody("non-finite coordinate".into()));
            }
            Ok(())
        };
        match self {
            ConvexBody::SinglePoint { point } => check(point)?,
            ConvexBody::AffineSubspace { offset, basis } => {
                check(offset)?;
                if basis.len() >= d {
                    return Err(Error::InvalidBody("affine subspace must be proper (K != R^d)".into()));
                }
                for (i, b) in basis.iter().enumerate() {
                    check(b)?;
                    for (j, c) in basis.iter().enumerate().skip(i) {
                        let target = if i == j { 1.0 } else { 0.0 };
                        if (dot(b, c) - target).abs() > 1e-12 {
                            return Err(Error::InvalidBody("affine basis is not orthonormal".into()));
                        }
                    }
                }
            }
            ConvexBody::Halfspace { normal, offset } => {
                check(normal)?;
                if norm(normal) == 0.0 || !offset.is_finite() {
                    return Err(Error::InvalidBody("halfspace normal must be nonzero".into()));
                }
            }
            ConvexBody::HPolytope { halfspaces } => {
                if halfspaces.is_empty() {
                    return Err(Error::InvalidBody("polytope without constraints is all of R^d".into()));
                }
                for h in halfspaces {
                    check(&h.normal)?;
                    if norm(&h.normal) == 0.0 || !h.offset.is_finite() {
                        return Err(Error::InvalidBody("polytope normal must be nonzero".into()));
                    }
                }
                self.project(&vec![0.0; d])?;
            }
            ConvexBody::VPolytope { vertices } => {
                for v in vertices {
                    check(v)?;
                }
            }
            ConvexBody::Ball { center, radius } => {
                check(center)?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidBody("ball radius must be positive".into()));
                }
            }
            ConvexBody::Box { lower, upper } => {
                if upper.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: upper.len() });
                }
                let mut bounded = false;
                for (l, u) in lower.iter().zip(upper) {
                    if l.is_nan() || u.is_nan() || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                        return Err(Error::InvalidBody("box bound out of range".into()));
                    }
                    if l > u {
                        return Err(Error::InvalidBody("box lower bound exceeds upper bound".into()));
                    }
                    bounded |= l.is_finite() || u.is_finite();
                }
                if !bounded {
                    return Err(Error::InvalidBody("box is all of R^d".into()));
                }
            }
        }
        Ok(())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        let d = self.ambient_dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        Ok(())
    }

    /// Nearest point of `K`. Points of `K` are returned unchanged.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.project_detailed(x)?.point)
    }

    pub fn project_detailed(&self, x: &[f64]) -> Result<Projection> {
        self.check_point(x)?;
        let d = x.len();
        Ok(match self {
            ConvexBody::SinglePoint { point } => Projection { point: point.clone(), face_dim: Some(0) },
            ConvexBody::AffineSubspace { offset, basis } => {
                let rel = sub(x, offset);
                let mut p = offset.clone();
                for b in basis {
                    p = axpy(&p, dot(&rel, b), b);
                }
                Projection { point: p, face_dim: Some(basis.len()) }
            }
            ConvexBody::Halfspace { normal, offset } => {
                let (n, len) = normalized(normal);
                let s = dot(&n, x) - offset / len;
                if s <= 0.0 {
                    Projection { point: x.to_vec(), face_dim: Some(d) }
                } else {
                    Projection { point: axpy(x, -s, &n), face_dim: Some(d - 1) }
                }
            }
            ConvexBody::HPolytope { halfspaces } => {
                let (normals, offsets) = unit_rows(halfspaces);
                let pr = polytope::project_h(&normals, &offsets, x)?;
                Projection { point: pr.point, face_dim: Some(d - pr.active_rank) }
            }
            ConvexBody::VPolytope { vertices } => {
                let pr = polytope::project_v(vertices, x)?;
                let face_dim = exposed_face_dim(vertices, x, &pr.point);
                Projection { point: pr.point, face_dim: Some(face_dim) }
            }
            ConvexBody::Ball { center, radius } => {
                let rel = sub(x, center);
                let r = norm(&rel);
                if r <= *radius {
                    Projection { point: x.to_vec(), face_dim: Some(d) }
                } else {
                    Projection { point: axpy(center, radius / r, &rel), face_dim: None }
                }
            }
            ConvexBody::Box { lower, upper } => {
                let mut free = 0;
                let p = x
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(&xi, (&l, &u))| {
                        if l < u && xi >= l && xi <= u {
                            free += 1;
                        }
                        xi.clamp(l, u)
                    })
                    .collect();
                Projection { point: p, face_dim: Some(free) }
            }
        })
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(dist(x, &p))
    }

    /// Membership with tolerance `1e-12 (1 + |x|)`.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.distance(x)? <= membership_tol(x))
    }

    /// `(x - n(x)) / |x - n(x)|`.
    pub fn distance_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.project(x)?;
        let r = dist(x, &p);
        if r <= membership_tol(x) {
            return Err(Error::PointInBody("distance gradient"));
        }
        Ok(scale(&sub(x, &p), 1.0 / r))
    }

    /// Trace of the Hessian of `d^2` at `x` outside `K`, in closed form.
    ///
    /// Away from the relative boundary of faces this is `2 (d - dim F)` with
    /// `F` the face containing `n(x)`; for a ball it picks up the curvature
    /// term `2 (d-1) d(x) / |x - c|`.
    pub fn laplacian_distance_sq(&self, x: &[f64]) -> Result<f64> {
        let d = x.len();
        let pr = self.project_detailed(x)?;
        let r = dist(x, &pr.point);
        if r <= membership_tol(x) {
            return Err(Error::PointInBody("Hessian of the squared distance"));
        }
        Ok(match self {
            ConvexBody::Ball { radius, .. } => {
                let rho = radius + r;
                2.0 + 2.0 * (d as f64 - 1.0) * r / rho
            }
            _ => 2.0 * (d - pr.face_dim.expect("face dimension for flat bodies")) as f64,
        })
    }

    /// `dim(K)`, the dimension of the affine hull.
    pub fn dim(&self) -> Result<usize> {
        Ok(self.affine_hull()?.basis.len())
    }

    /// `d_H`: `dim(K)` when `K` is lower dimensional, `d - 1` otherwise.
    pub fn boundary_dimension(&self) -> Result<usize> {
        let d = self.ambient_dim();
        let k = self.dim()?;
        Ok(if k < d { k } else { d - 1 })
    }

    /// Affine hull with an orthonormal basis; `origin` lies in `K`.
    pub fn affine_hull(&self) -> Result<AffineHull> {
        self.validate()?;
        let d = self.ambient_dim();
        let identity = || (0..d).map(|i| unit(d, i)).collect::<Vec<_>>();
        Ok(match self {
            ConvexBody::SinglePoint { point } => AffineHull { origin: point.clone(), basis: vec![] },
            ConvexBody::AffineSubspace { offset, basis } => {
                AffineHull { origin: offset.clone(), basis: basis.clone() }
            }
            ConvexBody::Halfspace { .. } => {
                AffineHull { origin: self.project(&vec![0.0; d])?, basis: identity() }
            }
            ConvexBody::Ball { center, .. } => AffineHull { origin: center.clone(), basis: identity() },
            ConvexBody::Box { lower, upper } => {
                let origin = lower
                    .iter()
                    .zip(upper)
                    .map(|(&l, &u)| 0.0f64.clamp(l, u))
                    .collect();
                let basis = (0..d).filter(|&i| upper[i] > lower[i]).map(|i| unit(d, i)).collect();
                AffineHull { origin, basis }
            }
            ConvexBody::VPolytope { vertices } => {
                let origin = vertices[0].clone();
                let diffs: Vec<Vec<f64>> = vertices.iter().skip(1).map(|v| sub(v, &origin)).collect();
                let sc = diffs.iter().map(|v| norm(v)).fold(0.0, f64::max);
                AffineHull { origin, basis: gram_schmidt(&diffs, 1e-10 * (1.0 + sc)) }
            }
            ConvexBody::HPolytope { halfspaces } => {
                // Projections of scattered points span the affine hull; a
                // face of K reached by any projection lies in it.
                let (normals, offsets) = unit_rows(halfspaces);
                let sc = 1.0 + offsets.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                let origin = polytope::project_h(&normals, &offsets, &vec![0.0; d])?.point;
                let mut rng = stream_rng(0x5EED, 0);
                let mut diffs = Vec::new();
                for _ in 0..(32 + 16 * d) {
                    let g: Vec<f64> = (0..d)
                        .map(|i| origin[i] + 4.0 * sc * gauss(&mut rng))
                        .collect();
                    let p = polytope::project_h(&normals, &offsets, &g)?.point;
                    diffs.push(sub(&p, &origin));
                }
                AffineHull { origin, basis: gram_schmidt(&diffs, 1e-8 * sc) }
            }
        })
    }

    /// `k_inf` in closed form. Every implemented variant admits one: bounded
    /// bodies give 0, flats their dimension, boxes the number of unbounded
    /// axes, polyhedra the dimension of their recession cone.
    pub fn exact_dimension_at_infinity(&self) -> Result<Option<usize>> {
        let d = self.ambient_dim();
        Ok(Some(match self {
            ConvexBody::SinglePoint { .. } | ConvexBody::Ball { .. } | ConvexBody::VPolytope { .. } => 0,
            ConvexBody::AffineSubspace { basis, .. } => basis.len(),
            ConvexBody::Halfspace { .. } => d,
            ConvexBody::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .filter(|(l, u)| !l.is_finite() || !u.is_finite())
                .count(),
            ConvexBody::HPolytope { halfspaces } => {
                let normals: Vec<Vec<f64>> = halfspaces.iter().map(|h| normalized(&h.normal).0).collect();
                let zeros = vec![0.0; normals.len()];
                let mut rng = stream_rng(0x5EED, 1);
                let mut rays = Vec::new();
                for _ in 0..(64 + 32 * d) {
                    let g: Vec<f64> = (0..d)
                        .map(|_| gauss(&mut rng))
                        .collect();
                    rays.push(polytope::project_h(&normals, &zeros, &g)?.point);
                }
                gram_schmidt(&rays, 1e-8).len()
            }
        }))
    }

    /// Largest `t <= cap` with `c + t u` in `K`, for `c` in `K`.
    pub fn ray_extent(&self, c: &[f64], u: &[f64], cap: f64) -> Result<f64> {
        let rows: Option<Vec<(Vec<f64>, f64)>> = match self {
            ConvexBody::Halfspace { normal, offset } => Some(vec![(normal.clone(), *offset)]),
            ConvexBody::HPolytope { halfspaces } => {
                Some(halfspaces.iter().map(|h| (h.normal.clone(), h.offset)).collect())
            }
            _ => None,
        };
        if let Some(rows) = rows {
            let mut t = cap;
            for (a, b) in rows {
                let au = dot(&a, u);
                let slack = (b - dot(&a, c)).max(0.0);
                if au > 1e-15 * norm(&a) {
                    t = t.min(slack / au);
                }
            }
            return Ok(t.max(0.0));
        }
        match self {
            ConvexBody::Box { lower, upper } => {
                let mut t = cap;
                for i in 0..c.len() {
                    if u[i] > 1e-15 {
                        t = t.min(((upper[i] - c[i]) / u[i]).max(0.0));
                    } else if u[i] < -1e-15 {
                        t = t.min(((lower[i] - c[i]) / u[i]).max(0.0));
                    }
                }
                Ok(t)
            }
            ConvexBody::Ball { center, radius } => {
                let w = sub(c, center);
                let uu = dot(u, u);
                let bw = dot(&w, u);
                let disc = bw * bw - uu * (dot(&w, &w) - radius * radius);
                Ok(((-bw + disc.max(0.0).sqrt()) / uu).clamp(0.0, cap))
            }
            ConvexBody::AffineSubspace { .. } => Ok(cap),
            ConvexBody::SinglePoint { .. } => Ok(0.0),
            _ => {
                let inside = |t: f64| -> Result<bool> {
                    let y = axpy(c, t, u);
                    Ok(self.distance(&y)? <= 1e-12 * (1.0 + norm(&y)))
                };
                if inside(cap)? {
                    return Ok(cap);
                }
                let (mut lo, mut hi) = (0.0, cap);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if inside(mid)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-13 * (1.0 + hi) {
                        break;
                    }
                }
                Ok(lo)
            }
        }
    }
}

fn gauss<R: rand::Rng>(rng: &mut R) -> f64 {
    rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, rng)
}

pub fn membership_tol(x: &[f64]) -> f64 {
    1e-12 * (1.0 + norm(x))
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

fn unit_rows(rows: &[HalfspaceRow]) -> (Vec<Vec<f64>>, Vec<f64>) {
    rows.iter()
        .map(|h| {
            let (n, len) = normalized(&h.normal);
            (n, h.offset / len)
        })
        .unzip()
}

/// Dimension of the face of `conv(vertices)` exposed by `x - n`.
fn exposed_face_dim(vertices: &[Vec<f64>], x: &[f64], n: &[f64]) -> usize {
    let u = sub(x, n);
    let len = norm(&u);
    let sc = vertices.iter().map(|v| dist(v, n)).fold(0.0, f64::max);
    let active: Vec<&Vec<f64>> = if len <= membership_tol(x) {
        vertices.iter().collect()
    } else {
        vertices
            .iter()
            .filter(|v| dot(&u, &sub(v, n)) / len >= -1e-9 * (1.0 + sc))
            .collect()
    };
    let diffs: Vec<Vec<f64>> = active.iter().skip(1).map(|v| sub(v, active[0])).collect();
    gram_schmidt(&diffs, 1e-10 * (1.0 + sc)).len()
}

pub fn project(body: &ConvexBody, x: &[f64]) -> Result<Vec<f64>> {
    body.project(x)
}

pub fn distance(body: &ConvexBody, x: &[f64]) -> Result<f64> {
    body.distance(x)
}

pub fn distance_gradient(body: &ConvexBody, x: &[f64]) -> Result<Vec<f64>> {
    body.distance_gradient(x)
}

pub fn boundary_dimension(body: &ConvexBody) -> Result<usize> {
    body.boundary_dimension()
}

/// Default finite-difference step for the Hessian of `d^2` at distance `r`.
pub fn default_hessian_step(r: f64) -> f64 {
    let h = (1e-3 * r).max(1e-4);
    if 2.0 * h >= r {
        r / 4.0
    } else {
        h
    }
}

/// Central-difference Hessian of `d^2` at `x`. The stencil must stay at
/// distance greater than `2h` from `K`; `step = None` picks the default.
pub fn hessian_distance_sq(body: &ConvexBody, x: &[f64], step: Option<f64>) -> Result<DMatrix<f64>> {
    let r = body.distance(x)?;
    if r <= membership_tol(x) {
        return Err(Error::PointInBody("Hessian of the squared distance"));
    }
    let h = step.unwrap_or_else(|| default_hessian_step(r));
    if !(h > 0.0) || 2.0 * h >= r {
        return Err(Error::StencilCrossesBoundary { step: h, distance: r });
    }
    let d = x.len();
    let f = |dx: &[(usize, f64)]| -> Result<f64> {
        let mut y = x.to_vec();
        for &(i, s) in dx {
            y[i] += s;
        }
        let t = body.distance(&y)?;
        Ok(t * t)
    };
    let f0 = r * r;
    let mut hm = DMatrix::zeros(d, d);
    for i in 0..d {
        hm[(i, i)] = (f(&[(i, h)])? - 2.0 * f0 + f(&[(i, -h)])?) / (h * h);
        for j in 0..i {
            let v = (f(&[(i, h), (j, h)])? - f(&[(i, h), (j, -h)])? - f(&[(i, -h), (j, h)])?
                + f(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h);
            hm[(i, j)] = v;
            hm[(j, i)] = v;
        }
    }
    Ok(hm)
}

/// Largest value of `d(l y + (1-l) z) - l d(y) - (1-l) d(z)` over `grid`.
///
/// The segment must lie in the complement of `K`; this is checked on the grid
/// and on a uniform refinement of 1025 points.
pub fn segment_convexity_check(body: &ConvexBody, y: &[f64], z: &[f64], grid: &[f64]) -> Result<f64> {
    let dy = body.distance(y)?;
    let dz = body.distance(z)?;
    let point = |l: f64| -> Vec<f64> { y.iter().zip(z).map(|(a, b)| l * a + (1.0 - l) * b).collect() };
    for i in 0..=1024 {
        let l = i as f64 / 1024.0;
        let x = point(l);
        if body.distance(&x)? <= membership_tol(&x) {
            return Err(Error::SegmentIntersectsBody);
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for &l in grid {
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::InvalidParameter(format!("segment parameter {l} outside [0,1]")));
        }
        let x = point(l);
        let dx = body.distance(&x)?;
        if dx <= membership_tol(&x) {
            return Err(Error::SegmentIntersectsBody);
        }
        let v = if y == z { 0.0 } else { dx - l * dy - (1.0 - l) * dz };
        worst = worst.max(v);
    }
    Ok(if grid.is_empty() { 0.0 } else { worst })
}

/// Orthonormal frame `(origin, tangent, normal)` adapted to the affine hull:
/// `x = origin + sum y_i t_i + sum z_j n_j`.
pub fn hull_frame(body: &ConvexBody) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let hull = body.affine_hull()?;
    let d = body.ambient_dim();
    let normal = orthonormal_complement(&hull.basis, d);
    Ok((hull.origin, hull.basis, normal))
}

mod lower_bounds {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        super::serialize_bounds(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw = Vec::<Option<f64>>::deserialize(d)?;
        Ok(raw.into_iter().map(|x| x.unwrap_or(f64::NEG_INFINITY)).collect())
    }
}

mod upper_bounds {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        super::serialize_bounds(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw = Vec::<Option<f64>>::deserialize(d)?;
        Ok(raw.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

fn serialize_bounds<S: serde::Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_finite() {
            seq.serialize_element(&Some(*x))?;
        } else {
            seq.serialize_element(&None::<f64>)?;
        }
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn projection_examples() {
        let ball = ConvexBody::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        assert!(close(&ball.project(&[2.0, 0.0]).unwrap(), &[1.0, 0.0], 1e-15));
        let bx = ConvexBody::Box { lower: vec![-1.0, -1.0], upper: vec![1.0, 1.0] };
        assert_eq!(bx.project(&[3.0, 2.0]).unwrap(), vec![1.0, 1.0]);
        let pt = ConvexBody::SinglePoint { point: vec![0.0; 3] };
        assert_eq!(pt.project(&[1.0, 2.0, 2.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(pt.distance(&[1.0, 2.0, 2.0]).unwrap(), 3.0);
    }

    #[test]
    fn segment_projection_matches_parameter_scan() {
        let seg = ConvexBody::VPolytope { vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0]] };
        let x = [2.0, 1.0];
        let best = (0..=10_000)
            .map(|i| i as f64 / 10_000.0)
            .min_by(|a, b| dist(&x, &[*a, 0.0]).total_cmp(&dist(&x, &[*b, 0.0])))
            .unwrap();
        let p = seg.project(&x).unwrap();
        assert!(close(&p, &[best, 0.0], 1e-12));
        assert!(close(&p, &[1.0, 0.0], 1e-12));
    }

    #[test]
    fn gradient_examples() {
        let pt = ConvexBody::SinglePoint { point: vec![0.0, 0.0] };
        assert_eq!(pt.distance(&[0.0, 3.0]).unwrap(), 3.0);
        assert!(close(&pt.distance_gradient(&[0.0, 3.0]).unwrap(), &[0.0, 1.0], 1e-15));
        let hs = ConvexBody::Halfspace { normal: vec![1.0, 0.0], offset: 0.0 };
        assert_eq!(hs.distance(&[3.0, 4.0]).unwrap(), 3.0);
        assert!(close(&hs.distance_gradient(&[3.0, 4.0]).unwrap(), &[1.0, 0.0], 1e-15));
        assert!(matches!(hs.distance_gradient(&[-1.0, 0.0]), Err(Error::PointInBody(_))));
    }

    #[test]
    fn hessian_trace_examples() {
        let pt = ConvexBody::SinglePoint { point: vec![0.0; 3] };
        let h = hessian_distance_sq(&pt, &[1.0, 0.5, -0.3], None).unwrap();
        assert!((h.trace() - 6.0).abs() < 1e-6);
        let hs = ConvexBody::Halfspace { normal: vec![0.0, 0.0, 1.0], offset: 0.0 };
        let h = hessian_distance_sq(&hs, &[0.3, 0.1, 2.0], None).unwrap();
        assert!((h.trace() - 2.0).abs() < 1e-6);
        let line = ConvexBody::AffineSubspace { offset: vec![0.0; 3], basis: vec![vec![1.0, 0.0, 0.0]] };
        let h = hessian_distance_sq(&line, &[0.0, 1.0, 1.0], None).unwrap();
        assert!((h.trace() - 4.0).abs() < 1e-6);
        assert_eq!(line.laplacian_distance_sq(&[0.0, 1.0, 1.0]).unwrap(), 4.0);
        assert!(matches!(
            hessian_distance_sq(&pt, &[1.0, 0.0, 0.0], Some(0.6)),
            Err(Error::StencilCrossesBoundary { .. })
        ));
    }

    #[test]
    fn boundary_dimension_examples() {
        assert_eq!(ConvexBody::SinglePoint { point: vec![0.0; 3] }.boundary_dimension().unwrap(), 0);
        assert_eq!(ConvexBody::Ball { center: vec![0.0; 2], radius: 1.0 }.boundary_dimension().unwrap(), 1);
        let seg = ConvexBody::VPolytope { vertices: vec![vec![0.0; 3], vec![1.0, 2.0, 0.0]] };
        assert_eq!(seg.boundary_dimension().unwrap(), 1);
    }

    #[test]
    fn h_polytope_dimension_detects_implicit_equalities() {
        // Unit square in the plane x3 = 0 of R^3.
        let rows = vec![
            HalfspaceRow { normal: vec![1.0, 0.0, 0.0], offset: 1.0 },
            HalfspaceRow { normal: vec![-1.0, 0.0, 0.0], offset: 0.0 },
            HalfspaceRow { normal: vec![0.0, 1.0, 0.0], offset: 1.0 },
            HalfspaceRow { normal: vec![0.0, -1.0, 0.0], offset: 0.0 },
            HalfspaceRow { normal: vec![0.0, 0.0, 1.0], offset: 0.0 },
            HalfspaceRow { normal: vec![0.0, 0.0, -1.0], offset: 0.0 },
        ];
        let k = ConvexBody::HPolytope { halfspaces: rows };
        assert_eq!(k.dim().unwrap(), 2);
        assert_eq!(k.exact_dimension_at_infinity().unwrap(), Some(0));
        assert_eq!(k.laplacian_distance_sq(&[0.5, 0.5, 2.0]).unwrap(), 2.0);
        assert_eq!(k.laplacian_distance_sq(&[2.0, 2.0, 2.0]).unwrap(), 6.0);
    }

    #[test]
    fn convexity_examples() {
        let ball = ConvexBody::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let v = segment_convexity_check(&ball, &[2.0, 0.0], &[0.0, 2.0], &grid).unwrap();
        assert!(v <= 1e-10);
        assert_eq!(segment_convexity_check(&ball, &[2.0, 0.0], &[2.0, 0.0], &grid).unwrap(), 0.0);
        let pt = ConvexBody::SinglePoint { point: vec![0.0, 0.0] };
        let v = segment_convexity_check(&pt, &[1.0, 1.0], &[1.0, -3.0], &grid).unwrap();
        assert!(v <= 0.0);
        assert_eq!(
            segment_convexity_check(&ball, &[2.0, 0.0], &[-2.0, 0.0], &grid).unwrap_err(),
            Error::SegmentIntersectsBody
        );
    }

    #[test]
    fn json_round_trip_with_infinite_bounds() {
        let strip = ConvexBody::Box { lower: vec![f64::NEG_INFINITY, -1.0], upper: vec![f64::INFINITY, 1.0] };
        let s = serde_json::to_string(&strip).unwrap();
        assert_eq!(s, r#"{"kind":"box","lower":[null,-1.0],"upper":[null,1.0]}"#);
        let back: ConvexBody = serde_json::from_str(&s).unwrap();
        assert_eq!(back, strip);
        let bad = r#"{"kind":"ball","center":[0,0],"radius":1,"colour":2}"#;
        assert!(serde_json::from_str::<ConvexBody>(bad).is_err());
    }

    #[test]
    fn invalid_bodies_are_rejected() {
        assert!(ConvexBody::Ball { center: vec![0.0], radius: 0.0 }.validate().is_err());
        let skew = ConvexBody::AffineSubspace { offset: vec![0.0; 2], basis: vec![vec![1.0, 1.0]] };
        assert!(skew.validate().is_err());
        let empty = ConvexBody::HPolytope {
            halfspaces: vec![
                HalfspaceRow { normal: vec![1.0], offset: -1.0 },
                HalfspaceRow { normal: vec![-1.0], offset: -1.0 },
            ],
        };
        assert_eq!(empty.validate().unwrap_err(), Error::EmptyBody);
        let pt = ConvexBody::SinglePoint { point: vec![0.0; 2] };
        assert!(matches!(pt.project(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }
}
