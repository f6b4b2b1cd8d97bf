//! Quotients integrated in the full space: stratified Monte Carlo and
//! iterated adaptive quadrature over a bounding box.

use std::cell::{Cell, RefCell};

use rand::Rng;

use super::{Form, Local, QuadratureMethod, QuadratureSpec, QuotientResult};
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::linalg::{axpy, dist, dot, norm, sphere_area, unit_ball_volume};
use crate::profiles::{is_bounded, BoundTrial, OperatorMethod};
use crate::quadrature::{integrate, QuadOptions};
use crate::sampling::{par_chunks, stream_rng};
use crate::weights::WeightParams;

const CHUNK: usize = 4096;

/// Integrand pair at `x`, evaluated from the trial's own point data.
fn local_at(trial: &BoundTrial, w: &WeightParams, form: Form, x: &[f64]) -> Result<Option<Local>> {
    let tp = trial.eval(x)?;
    if tp.value == 0.0 && tp.gradient.iter().all(|g| *g == 0.0) {
        return Ok(None);
    }
    let h = if form == Form::Rellich { trial.h_action(w, x, OperatorMethod::Analytic)? } else { 0.0 };
    Ok(Some(Local {
        d: tp.distance,
        phi: tp.value,
        grad_sq: dot(&tp.gradient, &tp.gradient),
        dir: dot(&tp.distance_gradient, &tp.gradient),
        h,
    }))
}

/// Sampling geometry: `x = origin + Σ y_i t_i + (shift + t) Σ u_j n_j`, with
/// `y` uniform in a ball and `t` drawn from a uniform / log-uniform mixture.
struct Plan {
    origin: Vec<f64>,
    tangent: Vec<Vec<f64>>,
    normal: Vec<Vec<f64>>,
    one_sided: bool,
    y_center: Vec<f64>,
    y_radius: f64,
    shift: f64,
    t_min: f64,
    t_max: f64,
    log_lo: f64,
}

impl Plan {
    fn for_trial(trial: &BoundTrial) -> Result<Self> {
        let (lo, hi) = trial.support();
        if let Some((frame, env)) = trial.frame() {
            return Ok(Plan {
                origin: frame.origin.clone(),
                tangent: frame.tangent.clone(),
                normal: frame.normal.clone(),
                one_sided: frame.one_sided,
                y_center: env.center.clone(),
                y_radius: env.outer,
                shift: 0.0,
                t_min: lo,
                t_max: hi,
                log_lo: lo,
            });
        }
        let (center, circum, shift) = body_center(&trial.body)?;
        let d = trial.dim();
        let identity = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Ok(Plan {
            origin: center,
            tangent: vec![],
            normal: identity,
            one_sided: false,
            y_center: vec![],
            y_radius: 0.0,
            shift,
            t_min: 0.0,
            t_max: circum + hi,
            log_lo: lo,
        })
    }

    fn density(&self, t: f64) -> f64 {
        let mut p = 0.5 / (self.t_max - self.t_min);
        if t >= self.log_lo {
            p += 0.5 / (t * (self.t_max / self.log_lo).ln());
        }
        p
    }

    /// Point and its weight for a stratified variate `u` in `[0, 1)`.
    fn sample<R: Rng>(&self, u: f64, rng: &mut R) -> (Vec<f64>, f64) {
        let t = if u < 0.5 {
            self.t_min + 2.0 * u * (self.t_max - self.t_min)
        } else {
            self.log_lo * (self.t_max / self.log_lo).powf(2.0 * u - 1.0)
        };
        let k = self.tangent.len();
        let m = self.normal.len();
        let mut x = self.origin.clone();
        let mut vol = 1.0;
        if k > 0 {
            let g: Vec<f64> = (0..k).map(|_| gauss(rng)).collect();
            let rad = self.y_radius * rng.random::<f64>().powf(1.0 / k as f64);
            let gn = norm(&g);
            for i in 0..k {
                x = axpy(&x, self.y_center[i] + rad * g[i] / gn, &self.tangent[i]);
            }
            vol = unit_ball_volume(k) * self.y_radius.powi(k as i32);
        }
        let rho = self.shift + t;
        let jac = if self.one_sided {
            x = axpy(&x, rho, &self.normal[0]);
            1.0
        } else {
            let g: Vec<f64> = (0..m).map(|_| gauss(rng)).collect();
            let gn = norm(&g);
            for j in 0..m {
                x = axpy(&x, rho * g[j] / gn, &self.normal[j]);
            }
            sphere_area(m) * rho.powi(m as i32 - 1)
        };
        (x, vol * jac / self.density(t))
    }
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, rng)
}

/// A point of `K`, the radius of `K` about it, and a radial shift for
/// sampling (the radius of a ball).
fn body_center(body: &ConvexBody) -> Result<(Vec<f64>, f64, f64)> {
    Ok(match body {
        ConvexBody::SinglePoint { point } => (point.clone(), 0.0, 0.0),
        ConvexBody::AffineSubspace { offset, basis } if basis.is_empty() => (offset.clone(), 0.0, 0.0),
        ConvexBody::Ball { center, radius } => (center.clone(), 0.0, *radius),
        ConvexBody::Box { lower, upper } if is_bounded(body) => {
            let c: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
            (c, 0.5 * dist(lower, upper), 0.0)
        }
        ConvexBody::VPolytope { vertices } => {
            let d = vertices[0].len();
            let mut c = vec![0.0; d];
            for v in vertices {
                c = axpy(&c, 1.0 / vertices.len() as f64, v);
            }
            let r = vertices.iter().map(|v| dist(v, &c)).fold(0.0, f64::max);
            (c, r, 0.0)
        }
        ConvexBody::HPolytope { .. } if is_bounded(body) => {
            let (lower, upper) = extent_box(body)?;
            let c: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();
            (c, 0.5 * dist(&lower, &upper), 0.0)
        }
        _ => return Err(Error::Unsupported("spatial radial quadrature needs a bounded body".into())),
    })
}

/// Axis-aligned box containing a bounded body: projecting a far point in
/// direction `u` lands on the face exposed by `u`.
fn extent_box(body: &ConvexBody) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = body.ambient_dim();
    let far = 1e6;
    let mut lo = vec![0.0; d];
    let mut up = vec![0.0; d];
    for i in 0..d {
        let mut x = vec![0.0; d];
        x[i] = far;
        up[i] = body.project(&x)?[i] + 1e-9;
        x[i] = -far;
        lo[i] = body.project(&x)?[i] - 1e-9;
    }
    Ok((lo, up))
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: f64,
    d: f64,
    nn: f64,
    dd: f64,
    nd: f64,
    count: usize,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        Moments {
            n: self.n + o.n,
            d: self.d + o.d,
            nn: self.nn + o.nn,
            dd: self.dd + o.dd,
            nd: self.nd + o.nd,
            count: self.count + o.count,
        }
    }
}

/// Stratified Monte Carlo estimate. The estimate depends only on
/// `(seed, samples)`: chunk `i` draws from stream `i` and chunks are
/// reduced in order.
pub(crate) fn monte_carlo_quotient(trial: &BoundTrial, w: &WeightParams, p: f64, form: Form, quad: &QuadratureSpec) -> Result<QuotientResult> {
    let plan = Plan::for_trial(trial)?;
    let total = quad.samples;
    if total < 1000 {
        return Err(Error::InsufficientSamples(format!("{total} samples; at least 1000 needed")));
    }
    let chunks = par_chunks(total, CHUNK, |ci, start, len| -> Result<Moments> {
        let mut rng = stream_rng(quad.seed, ci);
        let mut m = Moments::default();
        for i in start..start + len {
            let u = (i as f64 + rng.random::<f64>()) / total as f64;
            let (x, weight) = plan.sample(u, &mut rng);
            let (a, b) = match local_at(trial, w, form, &x)? {
                Some(l) => {
                    form.densities(w, p, &l, weight)
                }
                None => (0.0, 0.0),
            };
            m.n += a;
            m.d += b;
            m.nn += a * a;
            m.dd += b * b;
            m.nd += a * b;
            m.count += 1;
        }
        Ok(m)
    });
    let mut acc = Moments::default();
    for c in chunks {
        acc = acc.merge(c?);
    }
    let nf = acc.count as f64;
    let (mn, md) = (acc.n / nf, acc.d / nf);
    let var = |s2: f64, s: f64| ((s2 / nf - s * s).max(0.0) / nf).sqrt();
    let q = if md > 0.0 { mn / md } else { f64::NAN };
    // Delta method for the ratio of means.
    let vr = (acc.nn / nf - 2.0 * q * acc.nd / nf + q * q * acc.dd / nf - (mn - q * md).powi(2)).max(0.0) / nf;
    let se = if md > 0.0 { vr.sqrt() / md } else { f64::INFINITY };
    let mut r = QuotientResult::from_parts(mn, 3.0 * var(acc.nn, mn), md, 3.0 * var(acc.dd, md), acc.count, QuadratureMethod::MonteCarlo, true)?;
    r.error = 3.0 * se;
    Ok(r)
}

/// Axis-aligned box containing the support of the trial.
fn bounding_box(trial: &BoundTrial) -> Result<(Vec<f64>, Vec<f64>)> {
    let (_, hi) = trial.support();
    let d = trial.dim();
    if let Some((frame, env)) = trial.frame() {
        let mut lo = frame.origin.clone();
        let mut up = frame.origin.clone();
        for l in 0..d {
            for (c, t) in env.center.iter().zip(&frame.tangent) {
                lo[l] += c * t[l] - env.outer * t[l].abs();
                up[l] += c * t[l] + env.outer * t[l].abs();
            }
            for n in &frame.normal {
                if frame.one_sided {
                    lo[l] += (hi * n[l]).min(0.0);
                    up[l] += (hi * n[l]).max(0.0);
                } else {
                    lo[l] -= hi * n[l].abs();
                    up[l] += hi * n[l].abs();
                }
            }
        }
        return Ok((lo, up));
    }
    let (lo, up): (Vec<f64>, Vec<f64>) = match &trial.body {
        ConvexBody::VPolytope { vertices } => (0..d)
            .map(|i| {
                let it = vertices.iter().map(|v| v[i]);
                (it.clone().fold(f64::INFINITY, f64::min), it.fold(f64::NEG_INFINITY, f64::max))
            })
            .unzip(),
        ConvexBody::Box { lower, upper } => (lower.clone(), upper.clone()),
        other => {
            let (c, circ, shift) = body_center(other)?;
            let r = circ + shift;
            (c.iter().map(|x| x - r).collect(), c.iter().map(|x| x + r).collect())
        }
    };
    Ok((lo.iter().map(|x| x - hi).collect(), up.iter().map(|x| x + hi).collect()))
}

/// Iterated adaptive Gauss-Kronrod over the bounding box (`d <= 3`).
pub(crate) fn tensor_quotient(trial: &BoundTrial, w: &WeightParams, p: f64, form: Form, quad: &QuadratureSpec) -> Result<QuotientResult> {
    let d = trial.dim();
    if d > 3 {
        return Err(Error::Unsupported(format!("tensor-grid quadrature is limited to d <= 3, got {d}")));
    }
    let (lo, up) = bounding_box(trial)?;
    let per_level = ((quad.max_evals as f64).powf(1.0 / d as f64) as usize).clamp(300, 50_000);
    let opts = QuadOptions { rel_tol: quad.rel_tol, abs_tol: 0.0, max_evals: per_level };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let evals = Cell::new(0usize);

    let run = |which: usize| -> Result<(f64, f64, bool)> {
        fn level(
            i: usize,
            x: &mut Vec<f64>,
            ctx: &(&[f64], &[f64], QuadOptions, &dyn Fn(&[f64]) -> f64, &Cell<bool>),
        ) -> (f64, f64) {
            let (lo, up, opts, f, ok) = ctx;
            let d = lo.len();
            let mut xi = x.clone();
            let r = integrate(
                |t| {
                    xi[i] = t;
                    if i + 1 == d {
                        f(&xi)
                    } else {
                        let mut inner = xi.clone();
                        level(i + 1, &mut inner, ctx).0
                    }
                },
                lo[i],
                up[i],
                &[],
                *opts,
            );
            match r {
                Ok(q) => {
                    if !q.converged {
                        ok.set(false);
                    }
                    (q.value, q.error)
                }
                Err(_) => {
                    ok.set(false);
                    (0.0, f64::INFINITY)
                }
            }
        }
        let f = |x: &[f64]| -> f64 {
            evals.set(evals.get() + 1);
            match local_at(trial, w, form, x) {
                Ok(Some(l)) => {
                    let (a, b) = form.densities(w, p, &l, 1.0);
                    if which == 0 { a } else { b }
                }
                Ok(None) => 0.0,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };
        let ok = Cell::new(true);
        let mut x = vec![0.0; d];
        let (v, e) = level(0, &mut x, &(&lo, &up, opts, &f, &ok));
        Ok((v, e, ok.get()))
    };
    let (n, ne, ok1) = run(0)?;
    let (m, me, ok2) = run(1)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    QuotientResult::from_parts(n, ne, m, me, evals.get(), QuadratureMethod::TensorGrid, ok1 && ok2)
}
