#![allow(dead_code)]

use hardy_rellich::geometry::{ConvexBody, HalfspaceRow};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

pub fn point(d: usize) -> ConvexBody {
    ConvexBody::SinglePoint { point: vec![0.0; d] }
}

pub fn line(d: usize) -> ConvexBody {
    ConvexBody::AffineSubspace { offset: vec![0.0; d], basis: vec![unit(d, 0)] }
}

pub fn segment(d: usize) -> ConvexBody {
    ConvexBody::VPolytope { vertices: vec![vec![0.0; d], unit(d, 0)] }
}

pub fn halfspace(d: usize) -> ConvexBody {
    ConvexBody::Halfspace { normal: unit(d, d - 1), offset: 0.0 }
}

pub fn ball(d: usize) -> ConvexBody {
    ConvexBody::Ball { center: vec![0.0; d], radius: 1.0 }
}

pub fn unit_box(d: usize) -> ConvexBody {
    ConvexBody::Box { lower: vec![-1.0; d], upper: vec![1.0; d] }
}

/// The simplex `x_i >= 0, sum x_i <= 1`.
pub fn simplex(d: usize) -> ConvexBody {
    let mut rows: Vec<HalfspaceRow> = (0..d).map(|i| HalfspaceRow { normal: scale(&unit(d, i), -1.0), offset: 0.0 }).collect();
    rows.push(HalfspaceRow { normal: vec![1.0; d], offset: 1.0 });
    ConvexBody::HPolytope { halfspaces: rows }
}

pub fn triangle(d: usize) -> ConvexBody {
    ConvexBody::VPolytope { vertices: vec![vec![0.0; d], unit(d, 0), unit(d, 1)] }
}

pub fn scale(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

/// Every body kind in dimension `d >= 2`.
pub fn zoo(d: usize) -> Vec<(&'static str, ConvexBody)> {
    vec![
        ("point", point(d)),
        ("line", line(d)),
        ("segment", segment(d)),
        ("halfspace", halfspace(d)),
        ("ball", ball(d)),
        ("box", unit_box(d)),
        ("simplex", simplex(d)),
        ("triangle", triangle(d)),
    ]
}

pub fn gaussian<R: Rng>(rng: &mut R, d: usize, s: f64) -> Vec<f64> {
    (0..d).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// A point at distance at least `min` from `body`.
pub fn outside<R: Rng>(rng: &mut R, body: &ConvexBody, min: f64) -> Vec<f64> {
    let d = body.ambient_dim();
    loop {
        let x = gaussian(rng, d, 3.0);
        if body.distance(&x).unwrap() > min {
            return x;
        }
    }
}
