//! Small dense-vector helpers on `&[f64]`.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Volume of the unit ball in R^m.
pub fn unit_ball_volume(m: usize) -> f64 {
    // kappa_0 = 1, kappa_1 = 2, kappa_m = 2 pi / m * kappa_{m-2}
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / m as f64 * unit_ball_volume(m - 2),
    }
}

/// Surface measure of the unit sphere S^{m-1} in R^m (equals 2 for m = 1).
pub fn sphere_area(m: usize) -> f64 {
    m as f64 * unit_ball_volume(m)
}

/// Orthonormal complement of the span of `basis` (assumed orthonormal) in R^d.
pub fn orthonormal_complement(basis: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(d - basis.len().min(d));
    for i in 0..d {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        for b in basis.iter().chain(out.iter()) {
            let c = dot(&v, b);
            for (vj, bj) in v.iter_mut().zip(b) {
                *vj -= c * bj;
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            out.push(scale(&v, 1.0 / n));
        }
        if out.len() + basis.len() == d {
            break;
        }
    }
    out
}

/// Modified Gram-Schmidt; drops vectors whose residual norm falls below `tol`.
pub fn gram_schmidt(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &out {
            let c = dot(&w, b);
            for (wj, bj) in w.iter_mut().zip(b) {
                *wj -= c * bj;
            }
        }
        let n = norm(&w);
        if n > tol {
            out.push(scale(&w, 1.0 / n));
        }
    }
    out
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
