//! Hardy and Rellich Rayleigh quotients of trial functions, the action of
//! `H = -div(c(d) ∇)`, the convex splitting bound and pointwise residuals of
//! the Rellich profile inequality.
//!
//! Three integration routes are available. `Radial1d` reduces the integrals
//! exactly to one or two dimensions; `TensorGrid` and `MonteCarlo` integrate
//! in the full space and serve as independent cross-checks.

mod cutoff;
mod reduced;
mod spatial;

pub use cutoff::{plateau_cutoff_ratio, CutoffRatio};
pub use reduced::{radial_measure, MeasurePiece};

use serde::{Deserialize, Serialize};

use crate::constants::{b_alpha, ProblemSpec};
use crate::error::{Error, Result};
use crate::geometry::{hessian_distance_sq, membership_tol};
use crate::profiles::{fd_operator, radial_h, BoundTrial, OperatorMethod, Profile1D, TrialFunction, TrialPoint};
use crate::weights::WeightParams;
use crate::linalg::{scale, sub};

/// Integration route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMethod {
    #[default]
    #[serde(rename = "radial-1d")]
    Radial1d,
    TensorGrid,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub rel_tol: f64,
    pub max_evals: usize,
    pub seed: u64,
    /// Monte Carlo sample count.
    pub samples: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { method: QuadratureMethod::Radial1d, rel_tol: 1e-8, max_evals: 2_000_000, seed: 0, samples: 200_000 }
    }
}

impl QuadratureSpec {
    pub fn radial(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    pub fn tensor(rel_tol: f64, max_evals: usize) -> Self {
        Self { method: QuadratureMethod::TensorGrid, rel_tol, max_evals, ..Self::default() }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self { method: QuadratureMethod::MonteCarlo, samples, seed, rel_tol: 1e-2, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::InvalidParameter(format!("relative tolerance must lie in (0, 1e-2], got {}", self.rel_tol)));
        }
        if self.max_evals == 0 {
            return Err(Error::InvalidParameter("max_evals must be positive".into()));
        }
        Ok(())
    }
}

/// Numerator, denominator and their ratio with a propagated error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientResult {
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: f64,
    pub error: f64,
    pub evals: usize,
    pub method: QuadratureMethod,
    pub converged: bool,
}

impl QuotientResult {
    pub(crate) fn from_parts(num: f64, num_err: f64, den: f64, den_err: f64, evals: usize, method: QuadratureMethod, converged: bool) -> Result<Self> {
        if !(den > 1e-300) || !den.is_finite() || !num.is_finite() {
            return Err(Error::DenominatorUnderflow);
        }
        let q = num / den;
        let rel = num_err / num.abs().max(f64::MIN_POSITIVE) + den_err / den;
        let error = if num == 0.0 { num_err / den } else { q.abs() * rel };
        Ok(Self { numerator: num, denominator: den, quotient: q, error, evals, method, converged })
    }

    /// Relative error of the quotient.
    pub fn rel_error(&self) -> f64 {
        self.error / self.quotient.abs().max(f64::MIN_POSITIVE)
    }
}

/// Which functional is integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Form {
    /// `c |∇φ|^p` over `c d^{-p} |φ|^p`.
    Hardy,
    /// `c |∇d.∇φ|^p` over `c d^{-p} |φ|^p`.
    Directional,
    /// `|Hφ|^p` over `c^p d^{-2p} |φ|^p`.
    Rellich,
    /// `d^{p-β} |∇φ|^p` over `d^{-β} |φ|^p`.
    SplitRemainder { beta: f64 },
}

/// Pointwise data entering the integrands.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Local {
    pub d: f64,
    pub phi: f64,
    pub grad_sq: f64,
    pub dir: f64,
    pub h: f64,
}

impl Form {
    /// Numerator and denominator densities times `jac`, evaluated in log
    /// space so that large powers of tiny or huge distances do not overflow.
    pub(crate) fn densities(self, w: &WeightParams, p: f64, l: &Local, jac: f64) -> (f64, f64) {
        if l.d <= 0.0 || jac <= 0.0 {
            return (0.0, 0.0);
        }
        let lj = jac.ln();
        let lc = w.value_unchecked(l.d).ln();
        let ld = l.d.ln();
        let lphi = p * l.phi.abs().ln();
        let lgrad = 0.5 * p * l.grad_sq.ln();
        match self {
            Form::Hardy => ((lj + lc + lgrad).exp(), (lj + lc - p * ld + lphi).exp()),
            Form::Directional => ((lj + lc + p * l.dir.abs().ln()).exp(), (lj + lc - p * ld + lphi).exp()),
            Form::Rellich => ((lj + p * l.h.abs().ln()).exp(), (lj + p * (lc - 2.0 * ld) + lphi).exp()),
            Form::SplitRemainder { beta } => ((lj + (p - beta) * ld + lgrad).exp(), (lj - beta * ld + lphi).exp()),
        }
    }
}

fn bind(spec: &ProblemSpec, trial: &TrialFunction) -> Result<BoundTrial> {
    let b = trial.bind(&spec.body)?;
    if b.dim() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, got: b.dim() });
    }
    Ok(b)
}

fn evaluate(spec: &ProblemSpec, trial: &TrialFunction, form: Form, quad: &QuadratureSpec) -> Result<QuotientResult> {
    quad.validate()?;
    let bound = bind(spec, trial)?;
    let w = &spec.weights;
    match quad.method {
        QuadratureMethod::Radial1d => {
            if bound.frame().is_some() {
                reduced::product_quotient(&bound, w, spec.p, form, quad)
            } else {
                reduced::radial_quotient(&bound, w, spec.p, form, quad)
            }
        }
        QuadratureMethod::TensorGrid => spatial::tensor_quotient(&bound, w, spec.p, form, quad),
        QuadratureMethod::MonteCarlo => spatial::monte_carlo_quotient(&bound, w, spec.p, form, quad),
    }
}

/// `∫ c |∇φ|^p / ∫ c d^{-p} |φ|^p`.
pub fn hardy_quotient(spec: &ProblemSpec, trial: &TrialFunction, quad: &QuadratureSpec) -> Result<QuotientResult> {
    evaluate(spec, trial, Form::Hardy, quad)
}

/// `∫ c |∇d.∇φ|^p / ∫ c d^{-p} |φ|^p`; never larger than the Hardy quotient.
pub fn hardy_directional_quotient(spec: &ProblemSpec, trial: &TrialFunction, quad: &QuadratureSpec) -> Result<QuotientResult> {
    evaluate(spec, trial, Form::Directional, quad)
}

/// `∫ |Hφ|^p / ∫ c^p d^{-2p} |φ|^p`.
pub fn rellich_quotient(spec: &ProblemSpec, trial: &TrialFunction, quad: &QuadratureSpec) -> Result<QuotientResult> {
    if spec.p <= 1.0 {
        return Err(Error::InvalidParameter("Rellich quotients need p > 1".into()));
    }
    evaluate(spec, trial, Form::Rellich, quad)
}

/// `(Hφ)(x)` for the spec's weight.
pub fn weighted_operator_apply(spec: &ProblemSpec, trial: &TrialFunction, x: &[f64], method: OperatorMethod) -> Result<f64> {
    let b = bind(spec, trial)?;
    if spec.body.distance(x)? <= membership_tol(x) {
        return Err(Error::PointInBody("operator action"));
    }
    b.h_action(&spec.weights, x, method)
}

/// `(1-λ)^{-(p-1)} s^p + λ^{-(p-1)} t^p`, an upper bound for `(s+t)^p`.
pub fn lambda_split(s: f64, t: f64, lambda: f64, p: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::InvalidParameter("s and t must be nonnegative".into()));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    Ok((1.0 - lambda).powf(1.0 - p) * s.powf(p) + lambda.powf(1.0 - p) * t.powf(p))
}

/// The `λ` at which [`lambda_split`] is an equality: `t / (s + t)`.
pub fn split_equality_point(s: f64, t: f64, p: f64) -> Result<f64> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::InvalidParameter("s and t must be positive".into()));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    Ok(t / (s + t))
}

/// Upper bound on the optimal Hardy constant from a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitBound {
    pub bound: f64,
    pub first_term: f64,
    pub remainder: QuotientResult,
    pub beta: f64,
    pub lambda: f64,
}

/// `(1-λ)^{-(p-1)} |(β+δ-p)/p|^p + λ^{-(p-1)} ∫ d^{p-β}|∇φ|^p / ∫ d^{-β}|φ|^p`
/// for a pure power weight `c(s) = s^δ`.
pub fn hardy_split_bound(spec: &ProblemSpec, trial: &TrialFunction, beta: f64, lambda: f64, quad: &QuadratureSpec) -> Result<SplitBound> {
    let w = &spec.weights;
    if !w.is_pure_power() || w.a != 1.0 || w.b != 1.0 {
        return Err(Error::Unsupported("the splitting bound is stated for c(s) = s^delta".into()));
    }
    let p = spec.p;
    if !(lambda > 0.0 && lambda < 1.0) || !(p > 1.0) {
        return Err(Error::InvalidParameter("need 0 < lambda < 1 and p > 1".into()));
    }
    let remainder = evaluate(spec, trial, Form::SplitRemainder { beta }, quad)?;
    let first_term = (1.0 - lambda).powf(1.0 - p) * ((beta + w.delta - p) / p).abs().powf(p);
    Ok(SplitBound { bound: first_term + lambda.powf(1.0 - p) * remainder.quotient, first_term, remainder, beta, lambda })
}

/// Residuals of `Hχ ≥ b_α d^{-2} c χ` for `χ(d) = d^{-α} (1+d)^{α-α'}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub b_alpha: f64,
    /// Smallest `Hχ - b_α d^{-2} c χ` over the points.
    pub min_residual: f64,
    /// Smallest residual divided by `(1 + α∨α')^2 d^{-2} c χ`, the size of the
    /// individual terms of `Hχ`.
    pub min_relative: f64,
    pub worst_point: Vec<f64>,
    pub points: usize,
}

/// Pointwise check of the Rellich profile inequality at `points` of `Ω`.
///
/// `Analytic` uses the closed-form Laplacian of `d^2`;
/// `FiniteDifference` differentiates `χ(d(x))` directly.
pub fn rellich_profile_residual(spec: &ProblemSpec, alpha: f64, alpha_prime: f64, points: &[Vec<f64>], method: OperatorMethod) -> Result<ResidualReport> {
    let profile = Profile1D::rellich_profile(alpha, alpha_prime)?;
    let w = &spec.weights;
    let b = b_alpha(spec, alpha, alpha_prime);
    let body = &spec.body;
    let mut report = ResidualReport { b_alpha: b, min_residual: f64::INFINITY, min_relative: f64::INFINITY, worst_point: vec![], points: 0 };
    for x in points {
        let n = body.project(x)?;
        let r = crate::linalg::dist(x, &n);
        if r <= membership_tol(x) {
            return Err(Error::PointInBody("profile residual"));
        }
        let jet = profile.jet(r);
        let h = match method {
            OperatorMethod::Analytic => {
                let lap = body.laplacian_distance_sq(x)?;
                radial_h(w, jet, r, (0.5 * lap - 1.0) / r)
            }
            OperatorMethod::FiniteDifference { step } => {
                let grad_d = scale(&sub(x, &n), 1.0 / r);
                let tp = TrialPoint { value: jet.v, gradient: scale(&grad_d, jet.d1), distance: r, distance_gradient: grad_d };
                fd_operator(w, |y| Ok(profile.value(body.distance(y)?)), x, &tp, step)?
            }
        };
        let rhs = b * w.value_unchecked(r) * jet.v / (r * r);
        let res = h - rhs;
        let size = (1.0 + alpha.max(alpha_prime)).powi(2) * w.value_unchecked(r) * jet.v / (r * r);
        let rel = res / size.max(f64::MIN_POSITIVE);
        if res < report.min_residual {
            report.min_residual = res;
            report.worst_point = x.clone();
        }
        report.min_relative = report.min_relative.min(rel);
        report.points += 1;
    }
    Ok(report)
}

/// Trace of the central-difference Hessian of `d^2`, for cross-checking the
/// closed-form Laplacian used by the analytic operator.
pub fn laplacian_distance_sq_fd(spec: &ProblemSpec, x: &[f64]) -> Result<f64> {
    let h = hessian_distance_sq(&spec.body, x, None)?;
    Ok(h.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexBody;
    use crate::profiles::Envelope;

    fn point_spec(d: usize, p: f64, w: WeightParams) -> ProblemSpec {
        ProblemSpec::new(ConvexBody::SinglePoint { point: vec![0.0; d] }, p, w).unwrap()
    }

    #[test]
    fn scaling_invariance() {
        let spec = point_spec(3, 2.0, WeightParams::power(0.0));
        let prof = Profile1D::chi_sequence(100.0).unwrap();
        let q1 = hardy_quotient(&spec, &TrialFunction::radial(prof.clone()), &QuadratureSpec::default()).unwrap();
        let scaled = Profile1D::product(vec![prof, Profile1D::Power { alpha: 0.0 }]);
        let q2 = hardy_quotient(&spec, &TrialFunction::radial(scaled), &QuadratureSpec::default()).unwrap();
        assert!((q1.quotient - q2.quotient).abs() < 1e-10 * q1.quotient);
    }

    #[test]
    fn radial_directional_equals_full() {
        let spec = point_spec(4, 1.7, WeightParams::new(0.3, 1.1));
        let t = TrialFunction::power_localized(0.4, Profile1D::chi_plateau(50.0, 3.0).unwrap());
        let a = hardy_quotient(&spec, &t, &QuadratureSpec::default()).unwrap();
        let b = hardy_directional_quotient(&spec, &t, &QuadratureSpec::default()).unwrap();
        assert!((a.quotient - b.quotient).abs() < 1e-12 * a.quotient);
    }

    #[test]
    fn box_measure_matches_steiner_volume() {
        // Volume of {0 < d < s} around [0,1]x[0,2]: 2*3*s + π s^2.
        let b = ConvexBody::Box { lower: vec![0.0, 0.0], upper: vec![1.0, 2.0] };
        let pieces = radial_measure(&b).unwrap();
        let s: f64 = 0.7;
        let vol: f64 = pieces.iter().map(|p| p.coef * s.powf(p.exponent + 1.0) / (p.exponent + 1.0)).sum();
        assert!((vol - (6.0 * s + std::f64::consts::PI * s * s)).abs() < 1e-12);
    }

    #[test]
    fn split_inequality() {
        assert_eq!(lambda_split(1.0, 1.0, 0.5, 2.0).unwrap(), 4.0);
        let l = split_equality_point(2.0, 3.0, 2.5).unwrap();
        assert!((lambda_split(2.0, 3.0, l, 2.5).unwrap() - 5f64.powf(2.5)).abs() < 1e-10);
        assert!(lambda_split(1.0, 1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn tensor_grid_matches_reduced() {
        let spec = point_spec(2, 2.0, WeightParams::power(0.5));
        let t = TrialFunction::radial(Profile1D::sigma_sequence(4.0).unwrap());
        let a = hardy_quotient(&spec, &t, &QuadratureSpec::default()).unwrap();
        let b = hardy_quotient(&spec, &t, &QuadratureSpec::tensor(1e-6, 4_000_000)).unwrap();
        assert!((a.quotient - b.quotient).abs() <= 1e-4 * a.quotient, "{a:?} vs {b:?}");
    }

    #[test]
    fn monte_carlo_matches_product_reduction() {
        let line = ConvexBody::AffineSubspace { offset: vec![0.0; 3], basis: vec![vec![1.0, 0.0, 0.0]] };
        let spec = ProblemSpec::new(line, 2.0, WeightParams::power(0.0)).unwrap();
        let t = TrialFunction::product(Envelope::new(vec![0.0], 1.0, 3.0).unwrap(), Profile1D::chi_sequence(20.0).unwrap());
        let a = hardy_quotient(&spec, &t, &QuadratureSpec::default()).unwrap();
        let b = hardy_quotient(&spec, &t, &QuadratureSpec::monte_carlo(400_000, 7)).unwrap();
        assert!((a.quotient - b.quotient).abs() <= b.error + a.error, "{a:?} vs {b:?}");
        assert!((a.quotient / b.quotient - 1.0).abs() < 5e-3);
    }

    #[test]
    fn profile_residual_equality_case() {
        let spec = point_spec(5, 2.0, WeightParams::power(0.0));
        let pts: Vec<Vec<f64>> = (1..50).map(|i| vec![0.1 * i as f64, 0.3, -0.2, 0.05 * i as f64, 1.0]).collect();
        let r = rellich_profile_residual(&spec, 1.3, 1.3, &pts, OperatorMethod::Analytic).unwrap();
        assert!(r.min_residual.abs() < 1e-8, "{r:?}");
    }
}
