//! Exact Euclidean projection onto polytopes.
//!
//! H-polytopes use a dual active-set method (Goldfarb-Idnani specialised to
//! the identity Hessian), V-polytopes use Wolfe's minimum-norm-point
//! algorithm over barycentric coordinates. Both terminate in finitely many
//! steps and return the active structure needed for the face dimension.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Result of projecting onto an H-polytope.
#[derive(Debug, Clone)]
pub struct HProjection {
    pub point: Vec<f64>,
    /// Indices of constraints in the final active set.
    pub active: Vec<usize>,
    /// Rank of the active constraint normals.
    pub active_rank: usize,
}

/// Projects `x` onto `{y : normals[i] . y <= offsets[i]}`.
pub fn project_h(normals: &[Vec<f64>], offsets: &[f64], x: &[f64]) -> Result<HProjection> {
    let d = x.len();
    let m = normals.len();
    let mut y = x.to_vec();
    let mut active: Vec<usize> = Vec::new();
    let mut mult: Vec<f64> = Vec::new();
    let scale = 1.0 + norm(x) + offsets.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let feas_tol = 1e-13 * scale;

    let max_outer = 50 * (m + d + 1);
    for _ in 0..max_outer {
        // Most violated inactive constraint.
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..m {
            if active.contains(&i) {
                continue;
            }
            let s = dot(&normals[i], &y) - offsets[i];
            if s > feas_tol && worst.is_none_or(|(_, w)| s > w) {
                worst = Some((i, s));
            }
        }
        let Some((j, _)) = worst else {
            let active_rank = rank_of(normals, &active, d);
            return Ok(HProjection { point: y, active, active_rank });
        };
        let mut u_j = 0.0;
        let mut inner = 0;
        loop {
            inner += 1;
            if inner > 4 * (m + d + 2) {
                return Err(Error::QuadratureFailure(
                    "active-set projection failed to converge".into(),
                ));
            }
            let (z, r) = step_direction(normals, &active, &normals[j], d);
            let zz = dot(&z, &z);
            let s_j = dot(&normals[j], &y) - offsets[j];
            let t1 = if zz > 1e-24 { s_j / zz } else { f64::INFINITY };
            let mut t2 = f64::INFINITY;
            let mut drop = None;
            for (pos, &ri) in r.iter().enumerate() {
                if ri > 1e-14 {
                    let t = mult[pos] / ri;
                    if t < t2 {
                        t2 = t;
                        drop = Some(pos);
                    }
                }
            }
            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(Error::EmptyBody);
            }
            if t1.is_finite() {
                for (yi, zi) in y.iter_mut().zip(&z) {
                    *yi -= t * zi;
                }
            }
            for (mi, ri) in mult.iter_mut().zip(&r) {
                *mi -= t * ri;
            }
            u_j += t;
            if t1 <= t2 {
                active.push(j);
                mult.push(u_j);
                break;
            }
            let pos = drop.expect("dual step has a blocking constraint");
            active.remove(pos);
            mult.remove(pos);
        }
    }
    Err(Error::QuadratureFailure("active-set projection exceeded iteration budget".into()))
}

/// Returns `(z, r)` with `z = a - N r`, `r = (N^T N)^+ N^T a`.
fn step_direction(normals: &[Vec<f64>], active: &[usize], a: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    if active.is_empty() {
        return (a.to_vec(), Vec::new());
    }
    let q = active.len();
    let n = DMatrix::from_fn(d, q, |i, k| normals[active[k]][i]);
    let av = DVector::from_column_slice(a);
    let gram = n.transpose() * &n;
    let rhs = n.transpose() * &av;
    let r = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(q)),
    };
    let z = av - n * &r;
    (z.iter().copied().collect(), r.iter().copied().collect())
}

fn rank_of(normals: &[Vec<f64>], idx: &[usize], d: usize) -> usize {
    if idx.is_empty() {
        return 0;
    }
    let n = DMatrix::from_fn(d, idx.len(), |i, k| normals[idx[k]][i]);
    n.rank(1e-9)
}

/// Result of projecting onto the convex hull of a vertex list.
#[derive(Debug, Clone)]
pub struct VProjection {
    pub point: Vec<f64>,
    /// Vertex indices with positive barycentric weight.
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Wolfe's minimum-norm-point algorithm applied to `{v_i - x}`.
pub fn project_v(vertices: &[Vec<f64>], x: &[f64]) -> Result<VProjection> {
    let m = vertices.len();
    if m == 0 {
        return Err(Error::EmptyBody);
    }
    let p: Vec<Vec<f64>> = vertices
        .iter()
        .map(|v| v.iter().zip(x).map(|(a, b)| a - b).collect())
        .collect();
    let max_sq = p.iter().map(|v| dot(v, v)).fold(0.0f64, f64::max);
    let tol = 1e-13 * (1.0 + max_sq);

    let first = (0..m)
        .min_by(|&a, &b| dot(&p[a], &p[a]).total_cmp(&dot(&p[b], &p[b])))
        .unwrap();
    let mut s: Vec<usize> = vec![first];
    let mut w: Vec<f64> = vec![1.0];
    let mut cur = p[first].clone();

    for _ in 0..(100 * (m + 1)) {
        let cc = dot(&cur, &cur);
        let j = (0..m)
            .min_by(|&a, &b| dot(&cur, &p[a]).total_cmp(&dot(&cur, &p[b])))
            .unwrap();
        if cc <= tol || dot(&cur, &p[j]) >= cc - tol || s.contains(&j) {
            break;
        }
        s.push(j);
        w.push(0.0);
        // Minor cycle.
        loop {
            let alpha = affine_min_norm(&p, &s);
            if alpha.iter().all(|&a| a > 1e-14) {
                w = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (wi, ai) in w.iter().zip(&alpha) {
                if *ai <= 1e-14 {
                    let denom = wi - ai;
                    if denom > 0.0 {
                        theta = theta.min(wi / denom);
                    }
                }
            }
            for (wi, ai) in w.iter_mut().zip(&alpha) {
                *wi = theta * ai + (1.0 - theta) * *wi;
            }
            let mut k = 0;
            while k < s.len() {
                if w[k] <= 1e-14 {
                    s.remove(k);
                    w.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = w.iter().sum();
            for wi in w.iter_mut() {
                *wi /= total;
            }
            if s.len() <= 1 {
                break;
            }
        }
        cur = combine(&p, &s, &w);
    }
    let offset = combine(&p, &s, &w);
    let point = x.iter().zip(&offset).map(|(a, b)| a + b).collect();
    Ok(VProjection { point, support: s, weights: w })
}

fn combine(p: &[Vec<f64>], s: &[usize], w: &[f64]) -> Vec<f64> {
    let d = p[0].len();
    let mut out = vec![0.0; d];
    for (&i, &wi) in s.iter().zip(w) {
        for (o, v) in out.iter_mut().zip(&p[i]) {
            *o += wi * v;
        }
    }
    out
}

/// Barycentric weights of the minimum-norm point of the affine hull of `p[s]`.
fn affine_min_norm(p: &[Vec<f64>], s: &[usize]) -> Vec<f64> {
    let q = s.len();
    let mut a = DMatrix::zeros(q + 1, q + 1);
    let mut rhs = DVector::zeros(q + 1);
    for i in 0..q {
        for j in 0..q {
            a[(i, j)] = dot(&p[s[i]], &p[s[j]]);
        }
        a[(i, q)] = 1.0;
        a[(q, i)] = 1.0;
    }
    rhs[q] = 1.0;
    let sol = a
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|v| v.iter().all(|x| x.is_finite()))
        .or_else(|| a.svd(true, true).solve(&rhs, 1e-13).ok())
        .unwrap_or_else(|| {
            let mut v = DVector::zeros(q + 1);
            v[0] = 1.0;
            v
        });
    sol.iter().take(q).copied().collect()
}
