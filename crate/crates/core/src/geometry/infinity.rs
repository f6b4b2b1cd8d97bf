//! Dimension at infinity: the growth exponent of `|K ∩ B_r|` measured in the
//! affine hull of `K`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::{axpy, compensated_sum, norm, sphere_area};
use crate::sampling::{par_chunks, stream_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionAtInfinity {
    /// Slope estimate, or the exact value when one is known.
    pub estimate: f64,
    /// Closed-form value when the body admits one.
    pub exact: Option<usize>,
    /// Nearest integer when the estimate lies within 0.15 of it.
    pub rounded: Option<usize>,
    pub confident: bool,
    /// Volumes `|K ∩ B_r|` behind the estimate (empty for exact values).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub volumes: Vec<f64>,
}

impl DimensionAtInfinity {
    pub fn exact(k: usize) -> Self {
        Self { estimate: k as f64, exact: Some(k), rounded: Some(k), confident: true, volumes: vec![] }
    }

    /// The integer value, exact or confidently rounded.
    pub fn value(&self) -> Option<usize> {
        self.exact.or(self.rounded)
    }
}

const CHUNK: usize = 4096;

/// Monte Carlo estimate of `k_inf` together with the exact value if known.
pub fn dimension_at_infinity(
    body: &ConvexBody,
    r_values: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<DimensionAtInfinity> {
    let mut est = estimate_dimension_at_infinity(body, r_values, n_samples, seed)?;
    est.exact = body.exact_dimension_at_infinity()?;
    Ok(est)
}

/// Always runs the sampler, ignoring closed forms.
///
/// For a center `c` in `K` the body is star-shaped about `c`, so
/// `|K ∩ B_r(c)| = |S^{k-1}| / k * E_u[min(rho(u), r)^k]` with `rho` the
/// radial extent of `K` along direction `u` of the affine hull. Directions are
/// jittered-stratified on the circle when `k = 2` and Gaussian otherwise.
pub fn estimate_dimension_at_infinity(
    body: &ConvexBody,
    r_values: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<DimensionAtInfinity> {
    if r_values.len() < 2 || r_values.windows(2).any(|w| !(w[1] > w[0])) || !(r_values[0] > 0.0) {
        return Err(Error::InvalidParameter("radii must be positive and strictly increasing".into()));
    }
    let r_max = *r_values.last().unwrap();
    if r_max / r_values[0] < 100.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter("radii must span at least two decades".into()));
    }
    if n_samples < 1000 {
        return Err(Error::InsufficientSamples(format!(
            "{n_samples} directions; at least 1000 are needed for a 0.15 slope tolerance"
        )));
    }
    let hull = body.affine_hull()?;
    let k = hull.basis.len();
    let c = hull.origin.clone();
    let dir = |w: &[f64]| -> Vec<f64> {
        let mut u = vec![0.0; c.len()];
        for (wi, b) in w.iter().zip(&hull.basis) {
            u = axpy(&u, *wi, b);
        }
        u
    };

    // Per-chunk sums of min(rho, r)^k for every radius.
    let extents: Vec<Result<Vec<f64>>> = match k {
        0 => vec![Ok(vec![1.0; r_values.len()])],
        1 => {
            let mut sums = vec![0.0; r_values.len()];
            for s in [1.0, -1.0] {
                let rho = body.ray_extent(&c, &dir(&[s]), r_max)?;
                for (acc, r) in sums.iter_mut().zip(r_values) {
                    *acc += rho.min(*r) / 2.0;
                }
            }
            vec![Ok(sums)]
        }
        _ => par_chunks(n_samples, CHUNK, |chunk, start, len| {
            let mut rng = stream_rng(seed, chunk);
            let mut acc: Vec<Vec<f64>> = vec![Vec::with_capacity(len); r_values.len()];
            for i in start..start + len {
                let w: Vec<f64> = if k == 2 {
                    let t = std::f64::consts::TAU * (i as f64 + rng.random::<f64>()) / n_samples as f64;
                    vec![t.cos(), t.sin()]
                } else {
                    let g: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = norm(&g);
                    g.iter().map(|x| x / n).collect()
                };
                let rho = body.ray_extent(&c, &dir(&w), r_max)?;
                for (a, r) in acc.iter_mut().zip(r_values) {
                    a.push(rho.min(*r).powi(k as i32));
                }
            }
            Ok(acc.into_iter().map(compensated_sum).collect())
        }),
    };
    let mut totals = vec![Vec::new(); r_values.len()];
    for e in extents {
        for (t, v) in totals.iter_mut().zip(e?) {
            t.push(v);
        }
    }
    let volumes: Vec<f64> = match k {
        0 => vec![1.0; r_values.len()],
        1 => totals.into_iter().map(|t| 2.0 * compensated_sum(t)).collect(),
        _ => totals
            .into_iter()
            .map(|t| sphere_area(k) / k as f64 * compensated_sum(t) / n_samples as f64)
            .collect(),
    };
    if volumes.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidBody("body has empty relative interior".into()));
    }
    let estimate = if k == 0 { 0.0 } else { loglog_slope(r_values, &volumes) };
    let nearest = estimate.round();
    let ok = (estimate - nearest).abs() <= 0.15 && nearest >= 0.0 && nearest <= k as f64;
    Ok(DimensionAtInfinity {
        estimate,
        exact: None,
        rounded: ok.then_some(nearest as usize),
        confident: ok,
        volumes,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub(crate) fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
