//! Exact dimension reduction of the quotients.
//!
//! Around a point, ball, box or segment the volume between the level sets
//! `d = s` and `d = s + ds` is a sum of terms `coef (shift + s)^e ds`, one
//! per class of faces, and on each class `Δd = e / (shift + s)`. Radial
//! trials therefore reduce to one-dimensional integrals. Product trials
//! reduce to a two-dimensional integral over `(|y|, |z|)`.

use std::cell::RefCell;

use super::{Form, Local, QuadratureSpec, QuotientResult};
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::linalg::{dist, sphere_area, unit_ball_volume};
use crate::profiles::{product_h, radial_h, radial_integral, BoundTrial, Envelope, Frame};
use crate::quadrature::{integrate, QuadOptions, QuadResult};
use crate::weights::WeightParams;

/// One face class of a parallel-body decomposition: density
/// `coef (shift + s)^exponent` of the level set `{d = s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurePiece {
    pub coef: f64,
    pub shift: f64,
    pub exponent: f64,
}

/// Level-set measure of `d` for bodies where it is known in closed form.
pub fn radial_measure(body: &ConvexBody) -> Option<Vec<MeasurePiece>> {
    let d = body.ambient_dim();
    let box_pieces = |sides: Vec<f64>| -> Vec<MeasurePiece> {
        // Elementary symmetric polynomials of the side lengths are the
        // face-class volumes; class j contributes e_j (d-j) κ_{d-j} s^{d-j-1}.
        let mut e = vec![0.0; d + 1];
        e[0] = 1.0;
        for l in sides {
            for j in (1..=d).rev() {
                e[j] += e[j - 1] * l;
            }
        }
        (0..d)
            .filter(|&j| e[j] > 0.0)
            .map(|j| MeasurePiece {
                coef: e[j] * (d - j) as f64 * unit_ball_volume(d - j),
                shift: 0.0,
                exponent: (d - j - 1) as f64,
            })
            .collect()
    };
    match body {
        ConvexBody::SinglePoint { .. } => Some(vec![MeasurePiece { coef: sphere_area(d), shift: 0.0, exponent: (d - 1) as f64 }]),
        ConvexBody::AffineSubspace { basis, .. } if basis.is_empty() => {
            Some(vec![MeasurePiece { coef: sphere_area(d), shift: 0.0, exponent: (d - 1) as f64 }])
        }
        ConvexBody::Ball { radius, .. } => Some(vec![MeasurePiece { coef: sphere_area(d), shift: *radius, exponent: (d - 1) as f64 }]),
        ConvexBody::Box { lower, upper } if lower.iter().chain(upper).all(|v| v.is_finite()) => {
            Some(box_pieces(lower.iter().zip(upper).map(|(l, u)| u - l).collect()))
        }
        ConvexBody::VPolytope { vertices } if vertices.len() <= 2 => {
            let len = if vertices.len() == 2 { dist(&vertices[0], &vertices[1]) } else { 0.0 };
            let mut sides = vec![0.0; d];
            sides[0] = len;
            Some(box_pieces(sides))
        }
        _ => None,
    }
}

fn opts(quad: &QuadratureSpec, scale: f64) -> QuadOptions {
    QuadOptions { rel_tol: quad.rel_tol * scale, abs_tol: 0.0, max_evals: quad.max_evals }
}

fn finish(num: QuadResult, den: QuadResult) -> Result<QuotientResult> {
    QuotientResult::from_parts(num.value, num.error, den.value, den.error, num.evals + den.evals, super::QuadratureMethod::Radial1d, num.converged && den.converged)
}

/// Radial trial around a body with a closed-form level-set measure.
pub(crate) fn radial_quotient(trial: &BoundTrial, w: &WeightParams, p: f64, form: Form, quad: &QuadratureSpec) -> Result<QuotientResult> {
    let pieces = radial_measure(&trial.body)
        .ok_or_else(|| Error::Unsupported("no closed-form level-set measure for this body; use tensor-grid or monte-carlo".into()))?;
    let profile = trial.profile();
    let support = trial.support();
    let knots = profile.knots();
    let mut num = QuadResult::zero();
    let mut den = QuadResult::zero();
    for piece in &pieces {
        let local = |s: f64| -> Local {
            let j = profile.jet(s);
            let lap_d = piece.exponent / (piece.shift + s);
            Local { d: s, phi: j.v, grad_sq: j.d1 * j.d1, dir: j.d1, h: radial_h(w, j, s, lap_d) }
        };
        let jac = |s: f64| piece.coef * (piece.shift + s).powf(piece.exponent);
        let n = radial_integral(&|s: f64| form.densities(w, p, &local(s), jac(s)).0, support, &knots, opts(quad, 1.0))?;
        let m = radial_integral(&|s: f64| form.densities(w, p, &local(s), jac(s)).1, support, &knots, opts(quad, 1.0))?;
        num = num.add(n);
        den = den.add(m);
    }
    finish(num, den)
}

/// `∫ dy` of a radial function of `|y - center|` over `R^k`, `k >= 1`.
fn envelope_integral<F: Fn(f64) -> f64>(f: F, env: &Envelope, k: usize, opts: QuadOptions) -> Result<QuadResult> {
    let area = sphere_area(k);
    let knots = if env.inner > 0.0 { vec![env.inner] } else { vec![] };
    integrate(|rho: f64| area * rho.powi(k as i32 - 1) * f(rho), 0.0, env.outer, &knots, opts)
}

fn normal_jacobian(frame: &Frame, r: f64) -> f64 {
    if frame.one_sided {
        1.0
    } else {
        let m = frame.m();
        sphere_area(m) * r.powi(m as i32 - 1)
    }
}

/// Product trial `B(y) f(|z|)`: denominator factorises, numerator is a
/// nested integral over `|z|` (outer) and `|y|` (inner).
pub(crate) fn product_quotient(trial: &BoundTrial, w: &WeightParams, p: f64, form: Form, quad: &QuadratureSpec) -> Result<QuotientResult> {
    let (frame, env) = trial.frame().expect("product trial");
    let profile = trial.profile();
    let support = trial.support();
    let knots = profile.knots();
    let (k, m, one_sided) = (frame.k(), frame.m(), frame.one_sided);
    let local = |rho: f64, r: f64| -> Local {
        let b = env.jet(rho);
        let f = profile.jet(r);
        Local {
            d: r,
            phi: b.v * f.v,
            grad_sq: f.v * f.v * b.d1 * b.d1 + b.v * b.v * f.d1 * f.d1,
            dir: b.v * f.d1,
            h: if form == Form::Rellich { product_h(w, env, f, r, rho, k, m, one_sided) } else { 0.0 },
        }
    };
    // Denominator: ∫ |B|^p dy  *  ∫ weight(r) |f|^p dz.
    let by = if k == 0 {
        QuadResult { value: 1.0, error: 0.0, evals: 0, converged: true }
    } else {
        envelope_integral(|rho| env.jet(rho).v.abs().powf(p), env, k, opts(quad, 0.1))?
    };
    let unit_b = |r: f64| Local { d: r, phi: profile.jet(r).v, grad_sq: 0.0, dir: 0.0, h: 0.0 };
    let dz = radial_integral(&|r: f64| form.densities(w, p, &unit_b(r), normal_jacobian(frame, r)).1, support, &knots, opts(quad, 1.0))?;
    let den = QuadResult {
        value: by.value * dz.value,
        error: by.error * dz.value.abs() + dz.error * by.value.abs(),
        evals: by.evals + dz.evals,
        converged: by.converged && dz.converged,
    };

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_evals = RefCell::new(0usize);
    let inner = |r: f64| -> f64 {
        if k == 0 {
            return form.densities(w, p, &local(0.0, r), normal_jacobian(frame, r)).0;
        }
        match envelope_integral(|rho| form.densities(w, p, &local(rho, r), normal_jacobian(frame, r)).0, env, k, opts(quad, 0.1)) {
            Ok(q) => {
                *inner_evals.borrow_mut() += q.evals;
                q.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let mut num = radial_integral(&|r: f64| inner(r), support, &knots, opts(quad, 1.0))?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    num.evals += inner_evals.into_inner();
    finish(num, den)
}
