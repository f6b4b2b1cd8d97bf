//! Randomised self-checks of the distance machinery on one body.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{default_radii, estimate_dimension_at_infinity, hessian_distance_sq, segment_convexity_check, ConvexBody, DimensionAtInfinity};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub};
use crate::sampling::{derive_seed, stream_rng};

/// Worst values seen by [`check_suite`]. Each field is the quantity that
/// should be close to zero, or nonnegative for `hessian_trace_margin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryChecks {
    pub samples: usize,
    /// `max |P(P x) - P x|`.
    pub projection_idempotence: f64,
    /// `max (x - Px) . (y - Px)` over `y` in `K`.
    pub obtuse_angle: f64,
    /// `max ||∇d| - 1|`.
    pub gradient_norm: f64,
    /// `min tr ∇²d² - 2 (d - d_H)`.
    pub hessian_trace_margin: f64,
    /// Largest convexity defect of `d` along segments in the complement.
    pub segment_convexity: f64,
    pub k_inf: DimensionAtInfinity,
    pub passed: bool,
}

/// Tolerances used to set [`GeometryChecks::passed`].
pub const PROJECTION_TOL: f64 = 1e-10;
pub const OBTUSE_TOL: f64 = 1e-8;
pub const GRADIENT_TOL: f64 = 1e-10;
pub const HESSIAN_TOL: f64 = 1e-4;
pub const SEGMENT_TOL: f64 = 1e-10;

fn around<R: Rng>(rng: &mut R, c: &[f64]) -> Vec<f64> {
    c.iter().map(|v| v + 3.0 * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn outside<R: Rng>(rng: &mut R, body: &ConvexBody, c: &[f64], min: f64) -> Result<Vec<f64>> {
    for _ in 0..10_000 {
        let x = around(rng, c);
        if body.distance(&x)? > min {
            return Ok(x);
        }
    }
    Err(Error::InsufficientSamples("could not draw points at distance 0.1 from the body".into()))
}

/// Projection, gradient, Hessian-trace and segment checks at `samples`
/// random points around the point of `K` nearest the origin, plus the
/// sampled dimension at infinity.
pub fn check_suite(body: &ConvexBody, samples: usize, seed: u64) -> Result<GeometryChecks> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    body.validate()?;
    let d = body.ambient_dim();
    let codim = (d - body.boundary_dimension()?) as f64;
    let c = body.project(&vec![0.0; d])?;
    let mut rng = stream_rng(derive_seed(seed, "geometry"), 0);
    let (mut idem, mut obtuse, mut grad, mut trace) = (0f64, f64::NEG_INFINITY, 0f64, f64::INFINITY);
    for _ in 0..samples {
        let x = around(&mut rng, &c);
        let px = body.project(&x)?;
        idem = idem.max(norm(&sub(&body.project(&px)?, &px)));
        let y = body.project(&around(&mut rng, &c))?;
        obtuse = obtuse.max(dot(&sub(&x, &px), &sub(&y, &px)));
        if body.distance(&x)? > 1e-6 {
            grad = grad.max((norm(&body.distance_gradient(&x)?) - 1.0).abs());
        }
        let z = outside(&mut rng, body, &c, 0.1)?;
        trace = trace.min(hessian_distance_sq(body, &z, None)?.trace() - 2.0 * codim);
    }
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let (mut seg, mut done, mut tries) = (f64::NEG_INFINITY, 0, 0);
    while done < samples && tries < 100 * samples {
        tries += 1;
        let y = outside(&mut rng, body, &c, 0.1)?;
        let z = outside(&mut rng, body, &c, 0.1)?;
        match segment_convexity_check(body, &y, &z, &grid) {
            Ok(v) => {
                seg = seg.max(v);
                done += 1;
            }
            Err(Error::SegmentIntersectsBody) => continue,
            Err(e) => return Err(e),
        }
    }
    let seg = if done == 0 { 0.0 } else { seg };
    let mut k_inf = estimate_dimension_at_infinity(body, &default_radii(), 20_000, derive_seed(seed, "k_inf"))?;
    k_inf.exact = body.exact_dimension_at_infinity()?;
    let passed = idem <= PROJECTION_TOL
        && obtuse <= OBTUSE_TOL
        && grad <= GRADIENT_TOL
        && trace >= -HESSIAN_TOL
        && seg <= SEGMENT_TOL
        && k_inf.exact.is_none_or(|e| k_inf.rounded == Some(e));
    Ok(GeometryChecks {
        samples,
        projection_idempotence: idem,
        obtuse_angle: obtuse,
        gradient_norm: grad,
        hessian_trace_margin: trace,
        segment_convexity: seg,
        k_inf,
        passed,
    })
}
