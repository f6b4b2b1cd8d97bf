//! Trial functions on the complement of `K`, built from radial profiles.

use serde::{Deserialize, Serialize};

use super::{quintic, Jet, Profile1D};
use crate::error::{Error, Result};
use crate::geometry::{hull_frame, membership_tol, ConvexBody};
use crate::linalg::{axpy, dist, dot, norm, orthonormal_complement, scale, sub};
use crate::sampling::stream_rng;
use crate::weights::WeightParams;

/// Radial plateau bump `B(|y - center|)` on the affine hull of `K`:
/// equal to 1 up to `inner`, quintic transition to 0 at `outer`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub center: Vec<f64>,
    #[serde(default)]
    pub inner: f64,
    pub outer: f64,
}

impl Envelope {
    pub fn new(center: Vec<f64>, inner: f64, outer: f64) -> Result<Self> {
        let e = Self { center, inner, outer };
        e.validate()?;
        Ok(e)
    }

    fn validate(&self) -> Result<()> {
        if !(self.inner >= 0.0 && self.outer > self.inner && self.outer.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "envelope needs 0 <= inner < outer < inf, got [{}, {}]",
                self.inner, self.outer
            )));
        }
        Ok(())
    }

    /// Radial jet `B(ρ)`.
    pub fn jet(&self, rho: f64) -> Jet {
        if rho <= self.inner {
            Jet::ONE
        } else if rho >= self.outer {
            Jet::ZERO
        } else {
            let w = self.outer - self.inner;
            let s = quintic((rho - self.inner) / w);
            Jet { v: 1.0 - s.v, d1: -s.d1 / w, d2: -s.d2 / (w * w) }
        }
    }

    /// `ΔB` in `k` dimensions at radius `ρ`.
    pub fn laplacian(&self, rho: f64, k: usize) -> f64 {
        let j = self.jet(rho);
        if k <= 1 {
            return j.d2;
        }
        if rho < 1e-300 {
            // B'(ρ)/ρ -> B''(0) at the centre.
            return k as f64 * self.jet(0.0).d2;
        }
        j.d2 + (k as f64 - 1.0) * j.d1 / rho
    }
}

/// Spatial trial function `φ` on `Ω = R^d \ K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrialFunction {
    /// `φ = f(d(x))`.
    RadialDistance { profile: Profile1D },
    /// `φ = d(x)^{-α} f(d(x))`.
    PowerLocalized { alpha: f64, profile: Profile1D },
    /// `φ(y, z) = B(y) f(|z|)` in coordinates along (`y`) and across (`z`)
    /// the affine hull of `K`; for a halfspace `y` runs along the boundary
    /// and `z > 0` is the height above it.
    Product { envelope: Envelope, profile: Profile1D },
}

/// Orthonormal frame splitting `R^d` into tangential and normal parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub origin: Vec<f64>,
    pub tangent: Vec<Vec<f64>>,
    pub normal: Vec<Vec<f64>>,
    /// Normal part is a half-line (halfspace case).
    pub one_sided: bool,
}

impl Frame {
    pub fn for_body(body: &ConvexBody) -> Result<Self> {
        if let ConvexBody::Halfspace { normal, offset } = body {
            let len = norm(normal);
            let n = scale(normal, 1.0 / len);
            let tangent = orthonormal_complement(std::slice::from_ref(&n), n.len());
            return Ok(Self { origin: scale(&n, offset / len), tangent, normal: vec![n], one_sided: true });
        }
        let (origin, tangent, normal) = hull_frame(body)?;
        if normal.is_empty() {
            return Err(Error::Unsupported("product trials need dim K < d or a halfspace".into()));
        }
        Ok(Self { origin, tangent, normal, one_sided: false })
    }

    pub fn coords(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let rel = sub(x, &self.origin);
        (self.tangent.iter().map(|t| dot(&rel, t)).collect(), self.normal.iter().map(|n| dot(&rel, n)).collect())
    }

    pub fn point(&self, y: &[f64], z: &[f64]) -> Vec<f64> {
        let mut x = self.origin.clone();
        for (c, t) in y.iter().zip(&self.tangent) {
            x = axpy(&x, *c, t);
        }
        for (c, n) in z.iter().zip(&self.normal) {
            x = axpy(&x, *c, n);
        }
        x
    }

    pub fn k(&self) -> usize {
        self.tangent.len()
    }

    pub fn m(&self) -> usize {
        self.normal.len()
    }
}

/// Value and derivatives of a trial at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPoint {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// `d(x)`, zero inside `K`.
    pub distance: f64,
    /// `∇d(x)`, zero inside `K`.
    pub distance_gradient: Vec<f64>,
}

/// How to evaluate `Hφ = -div(c(d) ∇φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorMethod {
    /// Radial formula with the closed-form Laplacian of `d^2`, or the
    /// tangential/normal split for product trials.
    #[default]
    Analytic,
    /// `-c Δφ - c' ∇d.∇φ` with 5-point differences and one Richardson step.
    FiniteDifference { step: Option<f64> },
}

#[derive(Debug, Clone)]
enum Shape {
    Radial { profile: Profile1D },
    Product { frame: Frame, envelope: Envelope, profile: Profile1D },
}

/// A trial attached to a body, with the frame and support checks done once.
#[derive(Debug, Clone)]
pub struct BoundTrial {
    pub body: ConvexBody,
    shape: Shape,
    support: (f64, f64),
}

impl TrialFunction {
    pub fn radial(profile: Profile1D) -> Self {
        TrialFunction::RadialDistance { profile }
    }

    pub fn power_localized(alpha: f64, profile: Profile1D) -> Self {
        TrialFunction::PowerLocalized { alpha, profile }
    }

    pub fn product(envelope: Envelope, profile: Profile1D) -> Self {
        TrialFunction::Product { envelope, profile }
    }

    /// Profile of `d` for radial trials.
    pub fn radial_profile(&self) -> Option<Profile1D> {
        match self {
            TrialFunction::RadialDistance { profile } => Some(profile.clone()),
            TrialFunction::PowerLocalized { alpha, profile } => {
                Some(Profile1D::product(vec![Profile1D::Power { alpha: *alpha }, profile.clone()]))
            }
            TrialFunction::Product { .. } => None,
        }
    }

    /// The profile of the distance (radial) or of `|z|` (product).
    pub fn distance_profile(&self) -> Profile1D {
        match self {
            TrialFunction::Product { profile, .. } => profile.clone(),
            _ => self.radial_profile().expect("radial"),
        }
    }

    /// Checks the support conditions against `body` and precomputes frames.
    ///
    /// The profile must vanish near 0 and beyond some finite radius. Radial
    /// trials need a bounded body. Product envelopes must sit inside `K`
    /// (checked at the centre and at sampled points of the outer sphere), so
    /// that `d(y, z) = |z|` on the support.
    pub fn bind(&self, body: &ConvexBody) -> Result<BoundTrial> {
        body.validate()?;
        let profile = self.distance_profile();
        let support = profile.support();
        if !(support.0 > 0.0) {
            return Err(Error::SupportViolation("profile does not vanish near the body".into()));
        }
        if !support.1.is_finite() {
            return Err(Error::SupportViolation("profile support is unbounded".into()));
        }
        let shape = match self {
            TrialFunction::Product { envelope, profile } => {
                envelope.validate()?;
                let frame = Frame::for_body(body)?;
                if envelope.center.len() != frame.k() {
                    return Err(Error::DimensionMismatch { expected: frame.k(), got: envelope.center.len() });
                }
                if !frame.one_sided {
                    check_envelope_inside(body, &frame, envelope)?;
                }
                Shape::Product { frame, envelope: envelope.clone(), profile: profile.clone() }
            }
            _ => {
                if !is_bounded(body) {
                    return Err(Error::SupportViolation("radial trial around an unbounded body has no compact support".into()));
                }
                Shape::Radial { profile }
            }
        };
        Ok(BoundTrial { body: body.clone(), shape, support })
    }
}

pub(crate) fn is_bounded(body: &ConvexBody) -> bool {
    match body {
        ConvexBody::SinglePoint { .. } | ConvexBody::Ball { .. } | ConvexBody::VPolytope { .. } => true,
        ConvexBody::Box { lower, upper } => lower.iter().chain(upper).all(|v| v.is_finite()),
        ConvexBody::HPolytope { .. } => body.exact_dimension_at_infinity().ok().flatten() == Some(0),
        ConvexBody::AffineSubspace { basis, .. } => basis.is_empty(),
        ConvexBody::Halfspace { .. } => false,
    }
}

fn check_envelope_inside(body: &ConvexBody, frame: &Frame, env: &Envelope) -> Result<()> {
    let k = frame.k();
    let zeros = vec![0.0; frame.m()];
    let mut probes = vec![env.center.clone()];
    for i in 0..k {
        for s in [-1.0, 1.0] {
            let mut y = env.center.clone();
            y[i] += s * env.outer;
            probes.push(y);
        }
    }
    let mut rng = stream_rng(0xE4E1, 0);
    for _ in 0..64 {
        let g: Vec<f64> = (0..k).map(|_| rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng)).collect();
        let gn = norm(&g);
        if gn > 0.0 {
            probes.push(axpy(&env.center, env.outer / gn, &g));
        }
    }
    for y in probes {
        let x = frame.point(&y, &zeros);
        if !body.contains(&x)? {
            return Err(Error::SupportViolation("envelope leaves the body".into()));
        }
    }
    Ok(())
}

impl BoundTrial {
    /// Support of the distance profile `[lo, hi]`, `lo > 0`.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn profile(&self) -> &Profile1D {
        match &self.shape {
            Shape::Radial { profile } | Shape::Product { profile, .. } => profile,
        }
    }

    pub fn frame(&self) -> Option<(&Frame, &Envelope)> {
        match &self.shape {
            Shape::Product { frame, envelope, .. } => Some((frame, envelope)),
            Shape::Radial { .. } => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.body.ambient_dim()
    }

    /// Value, gradient and distance data at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<TrialPoint> {
        let n = self.body.project(x)?;
        let r = dist(x, &n);
        let d = x.len();
        let inside = r <= membership_tol(x);
        let grad_d = if inside { vec![0.0; d] } else { scale(&sub(x, &n), 1.0 / r) };
        let (value, gradient) = match &self.shape {
            Shape::Radial { profile } => {
                if inside || r <= self.support.0 || r >= self.support.1 {
                    (0.0, vec![0.0; d])
                } else {
                    let j = profile.jet(r);
                    (j.v, scale(&grad_d, j.d1))
                }
            }
            Shape::Product { frame, envelope, profile } => self.product_value(frame, envelope, profile, x),
        };
        Ok(TrialPoint { value, gradient, distance: if inside { 0.0 } else { r }, distance_gradient: grad_d })
    }

    fn product_value(&self, frame: &Frame, env: &Envelope, profile: &Profile1D, x: &[f64]) -> (f64, Vec<f64>) {
        let d = x.len();
        let (y, z) = frame.coords(x);
        let yc = sub(&y, &env.center);
        let rho = norm(&yc);
        let (zr, zdir) = normal_radius(frame, &z);
        if zr <= self.support.0 || zr >= self.support.1 || rho >= env.outer {
            return (0.0, vec![0.0; d]);
        }
        let b = env.jet(rho);
        let f = profile.jet(zr);
        let mut g = vec![0.0; d];
        if rho > 0.0 {
            for (c, t) in yc.iter().zip(&frame.tangent) {
                g = axpy(&g, f.v * b.d1 * c / rho, t);
            }
        }
        for (c, nv) in zdir.iter().zip(&frame.normal) {
            g = axpy(&g, b.v * f.d1 * c, nv);
        }
        (b.v * f.v, g)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.value)
    }

    /// `(Hφ)(x)` for the weight `w`.
    pub fn h_action(&self, w: &WeightParams, x: &[f64], method: OperatorMethod) -> Result<f64> {
        match method {
            OperatorMethod::Analytic => self.h_analytic(w, x),
            OperatorMethod::FiniteDifference { step } => self.h_finite_difference(w, x, step),
        }
    }

    fn h_analytic(&self, w: &WeightParams, x: &[f64]) -> Result<f64> {
        match &self.shape {
            Shape::Radial { profile } => {
                let r = self.body.distance(x)?;
                if r <= self.support.0 || r >= self.support.1 {
                    return Ok(0.0);
                }
                let lap = self.body.laplacian_distance_sq(x)?;
                let lap_d = (0.5 * lap - 1.0) / r;
                Ok(radial_h(w, profile.jet(r), r, lap_d))
            }
            Shape::Product { frame, envelope, profile } => {
                let (y, z) = frame.coords(x);
                let rho = norm(&sub(&y, &envelope.center));
                let (zr, _) = normal_radius(frame, &z);
                if zr <= self.support.0 || zr >= self.support.1 || rho >= envelope.outer {
                    return Ok(0.0);
                }
                Ok(product_h(w, envelope, profile.jet(zr), zr, rho, frame.k(), frame.m(), frame.one_sided))
            }
        }
    }

    fn h_finite_difference(&self, w: &WeightParams, x: &[f64], step: Option<f64>) -> Result<f64> {
        let tp = self.eval(x)?;
        if tp.distance == 0.0 {
            return Err(Error::PointInBody("operator action"));
        }
        fd_operator(w, |y| self.value(y), x, &tp, step)
    }
}

/// `-c(d) Δφ - c'(d) ∇d.∇φ` with the Laplacian from 5-point differences
/// per axis and one Richardson step. `tp` holds `φ`, `∇φ`, `d`, `∇d` at `x`.
pub(crate) fn fd_operator<F: Fn(&[f64]) -> Result<f64>>(w: &WeightParams, phi: F, x: &[f64], tp: &TrialPoint, step: Option<f64>) -> Result<f64> {
    let r = tp.distance;
    let h = step.unwrap_or(1e-2 * r);
    if 2.0 * h >= r {
        return Err(Error::StencilCrossesBoundary { step: 2.0 * h, distance: r });
    }
    let lap = |h: f64| -> Result<f64> {
        let mut acc = 0.0;
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            let mut at = |t: f64| -> Result<f64> {
                xp[i] = x[i] + t;
                let v = phi(&xp);
                xp[i] = x[i];
                v
            };
            let s = -at(2.0 * h)? + 16.0 * at(h)? - 30.0 * tp.value + 16.0 * at(-h)? - at(-2.0 * h)?;
            acc += s / (12.0 * h * h);
        }
        Ok(acc)
    };
    let l = (16.0 * lap(0.5 * h)? - lap(h)?) / 15.0;
    let c = w.value_unchecked(r);
    let dc = w.derivative_unchecked(r);
    Ok(-c * l - dc * dot(&tp.distance_gradient, &tp.gradient))
}

/// `|z|` and `z/|z|`; for a half-line only `z > 0` counts.
fn normal_radius(frame: &Frame, z: &[f64]) -> (f64, Vec<f64>) {
    if frame.one_sided {
        return if z[0] > 0.0 { (z[0], vec![1.0]) } else { (0.0, vec![0.0]) };
    }
    let r = norm(z);
    if r == 0.0 {
        (0.0, vec![0.0; z.len()])
    } else {
        (r, scale(z, 1.0 / r))
    }
}

/// `-(c f')' - c f' Δd` at distance `r`.
pub(crate) fn radial_h(w: &WeightParams, f: Jet, r: f64, lap_d: f64) -> f64 {
    let c = w.value_unchecked(r);
    let dc = w.derivative_unchecked(r);
    -(dc * f.d1 + c * f.d2) - c * f.d1 * lap_d
}

/// `-c f ΔB + B H_z f` for a product trial with `k` tangential and `m`
/// normal coordinates.
#[allow(clippy::too_many_arguments)]
pub(crate) fn product_h(w: &WeightParams, env: &Envelope, f: Jet, zr: f64, rho: f64, k: usize, m: usize, one_sided: bool) -> f64 {
    let b = env.jet(rho);
    let lap_b = if k == 0 { 0.0 } else { env.laplacian(rho, k) };
    let lap_d = if one_sided { 0.0 } else { (m as f64 - 1.0) / zr };
    -w.value_unchecked(zr) * f.v * lap_b + b.v * radial_h(w, f, zr, lap_d)
}
