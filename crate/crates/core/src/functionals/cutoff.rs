//! Plateau cutoffs inside a planar convex body with nonempty interior.
//!
//! `η_r = ζ_r ξ` where `ζ_r` is 1 on the disc of radius `r` around the point
//! of `K` nearest the origin and 0 outside radius `r + 1`, and `ξ` rises from
//! 0 on `∂K` to 1 at interior depth 1. The ratio `∫|∇η_r|^p / ∫|η_r|^p`
//! decays like `1/r` when `K` is two-dimensional at infinity.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::profiles::quintic;
use crate::quadrature::{integrate, QuadOptions, QuadResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffRatio {
    pub radius: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub error: f64,
}

/// Finite sides as `(axis, sign, offset)`: depth is `sign * (y[axis] - offset)`.
fn sides(lower: &[f64], upper: &[f64]) -> Vec<(usize, f64, f64)> {
    let mut out = vec![];
    for i in 0..2 {
        if lower[i].is_finite() {
            out.push((i, 1.0, lower[i]));
        }
        if upper[i].is_finite() {
            out.push((i, -1.0, upper[i]));
        }
    }
    out
}

/// Ratio of the `p`-energy to the `p`-mass of the plateau cutoff of radius `r`.
pub fn plateau_cutoff_ratio(body: &ConvexBody, r: f64, p: f64, opts: QuadOptions) -> Result<CutoffRatio> {
    let (lower, upper) = match body {
        ConvexBody::Box { lower, upper } if lower.len() == 2 => (lower, upper),
        _ => return Err(Error::Unsupported("plateau cutoffs are implemented for planar boxes".into())),
    };
    if lower.iter().zip(upper).any(|(l, u)| !(u - l > 2.0)) {
        return Err(Error::InvalidParameter("box must be wider than 2 in every direction".into()));
    }
    if !(r >= 1.0 && r.is_finite()) || !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("need r >= 1 and p >= 1, got r={r}, p={p}")));
    }
    let faces = sides(lower, upper);
    let center = body.project(&[0.0, 0.0])?;

    // Value and gradient of η at polar coordinates (ρ, θ) around the center.
    let eta = |rho: f64, u: [f64; 2]| -> (f64, [f64; 2]) {
        let y = [center[0] + rho * u[0], center[1] + rho * u[1]];
        let (mut depth, mut grad_depth) = (f64::INFINITY, [0.0; 2]);
        for &(i, s, off) in &faces {
            let v = s * (y[i] - off);
            if v < depth {
                depth = v;
                grad_depth = [0.0; 2];
                grad_depth[i] = s;
            }
        }
        if depth <= 0.0 {
            return (0.0, [0.0; 2]);
        }
        let xi = if depth >= 1.0 { quintic(1.0) } else { quintic(depth) };
        let xi_d1 = if depth >= 1.0 { 0.0 } else { xi.d1 };
        let t = (rho - r).clamp(0.0, 1.0);
        let z = quintic(t);
        let (zeta, zeta_d1) = (1.0 - z.v, if rho > r && rho < r + 1.0 { -z.d1 } else { 0.0 });
        let g = [zeta_d1 * xi.v * u[0] + zeta * xi_d1 * grad_depth[0], zeta_d1 * xi.v * u[1] + zeta * xi_d1 * grad_depth[1]];
        (zeta * xi.v, g)
    };

    // Radii along direction u where the depth crosses 0 or 1 or the active side changes.
    let ray_knots = |u: [f64; 2]| -> Vec<f64> {
        let mut k = vec![r, r + 1.0];
        let lin: Vec<(f64, f64)> = faces.iter().map(|&(i, s, off)| (s * (center[i] - off), s * u[i])).collect();
        for (a, b) in &lin {
            if *b != 0.0 {
                k.extend([-a / b, (1.0 - a) / b]);
            }
        }
        for i in 0..lin.len() {
            for j in i + 1..lin.len() {
                let db = lin[i].1 - lin[j].1;
                if db != 0.0 {
                    k.push((lin[j].0 - lin[i].0) / db);
                }
            }
        }
        k.retain(|&x| x > 0.0 && x < r + 1.0);
        k
    };

    let inner_opts = QuadOptions { rel_tol: opts.rel_tol * 0.1, ..opts };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let evals = RefCell::new(0usize);
    let radial = |theta: f64, energy: bool| -> f64 {
        let u = [theta.cos(), theta.sin()];
        let f = |rho: f64| {
            let (v, g) = eta(rho, u);
            let x = if energy { (g[0] * g[0] + g[1] * g[1]).powf(0.5 * p) } else { v.abs().powf(p) };
            rho * x
        };
        match integrate(f, 0.0, r + 1.0, &ray_knots(u), inner_opts) {
            Ok(q) => {
                *evals.borrow_mut() += q.evals;
                q.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let angle_knots: Vec<f64> = (1..8).map(|i| i as f64 * PI / 4.0).collect();
    let num = integrate(|t| radial(t, true), 0.0, 2.0 * PI, &angle_knots, opts)?;
    let den = integrate(|t| radial(t, false), 0.0, 2.0 * PI, &angle_knots, opts)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    finish(r, num, den)
}

fn finish(r: f64, num: QuadResult, den: QuadResult) -> Result<CutoffRatio> {
    if !(den.value > 0.0) {
        return Err(Error::DenominatorUnderflow);
    }
    let ratio = num.value / den.value;
    let error = ratio * (num.error / num.value.abs().max(f64::MIN_POSITIVE) + den.error / den.value);
    Ok(CutoffRatio { radius: r, numerator: num.value, denominator: den.value, ratio, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_decays_on_quadrant() {
        let quadrant = ConvexBody::Box { lower: vec![0.0, 0.0], upper: vec![f64::INFINITY, f64::INFINITY] };
        let a = plateau_cutoff_ratio(&quadrant, 10.0, 2.0, QuadOptions::rel(1e-8)).unwrap();
        let b = plateau_cutoff_ratio(&quadrant, 100.0, 2.0, QuadOptions::rel(1e-8)).unwrap();
        let slope = (b.ratio / a.ratio).log10();
        assert!((slope + 1.0).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn rejects_non_planar() {
        let b = ConvexBody::Box { lower: vec![0.0; 3], upper: vec![f64::INFINITY; 3] };
        assert!(plateau_cutoff_ratio(&b, 10.0, 2.0, QuadOptions::rel(1e-6)).is_err());
    }
}
