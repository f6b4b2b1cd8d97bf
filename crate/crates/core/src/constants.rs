//! Closed-form Hardy and Rellich constants, their validity conditions, and
//! the case analysis deciding when the optimal constants are known exactly.
//!
//! Throughout, `D = d - d_H` is the codimension of the boundary and
//! `m = δ∧δ'`, `M = δ∨δ'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, GeometryReport};
use crate::weights::WeightParams;

/// Absolute tolerance for comparisons between constants.
pub const CONSTANT_TOL: f64 = 1e-12;

/// A full experiment: the body, the exponent `p` and the weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemSpecInput")]
pub struct ProblemSpec {
    pub d: usize,
    pub body: ConvexBody,
    pub p: f64,
    pub weights: WeightParams,
    pub geometry: GeometryReport,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSpecInput {
    #[serde(default)]
    d: Option<usize>,
    body: ConvexBody,
    p: f64,
    #[serde(default)]
    weights: WeightParams,
    /// Accepted and recomputed, so serialized specs read back unchanged.
    #[serde(default)]
    #[allow(dead_code)]
    geometry: Option<serde_json::Value>,
}

impl TryFrom<ProblemSpecInput> for ProblemSpec {
    type Error = Error;

    fn try_from(v: ProblemSpecInput) -> Result<Self> {
        let spec = ProblemSpec::new(v.body, v.p, v.weights)?;
        if let Some(d) = v.d {
            if d != spec.d {
                return Err(Error::DimensionMismatch { expected: d, got: spec.d });
            }
        }
        Ok(spec)
    }
}

impl ProblemSpec {
    pub fn new(body: ConvexBody, p: f64, weights: WeightParams) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p must be finite and at least 1, got {p}")));
        }
        weights.validate()?;
        let geometry = GeometryReport::for_body(&body)?;
        Ok(Self { d: geometry.d, body, p, weights, geometry })
    }

    /// A representative body with the given dimensions: the span of the first
    /// `k` axes when `k < d`, the halfspace `x_d <= 0` when `k = d`.
    pub fn with_dims(d: usize, k: usize, p: f64, weights: WeightParams) -> Result<Self> {
        if d == 0 || k > d {
            return Err(Error::InvalidParameter(format!("need 0 <= k <= d and d >= 1 (d={d}, k={k})")));
        }
        let unit = |i: usize| {
            let mut v = vec![0.0; d];
            v[i] = 1.0;
            v
        };
        let body = if k == d {
            ConvexBody::Halfspace { normal: unit(d - 1), offset: 0.0 }
        } else if k == 0 {
            ConvexBody::SinglePoint { point: vec![0.0; d] }
        } else {
            ConvexBody::AffineSubspace { offset: vec![0.0; d], basis: (0..k).map(unit).collect() }
        };
        Self::new(body, p, weights)
    }

    pub fn d_h(&self) -> usize {
        self.geometry.d_h
    }

    pub fn k(&self) -> usize {
        self.geometry.k
    }

    /// `d - d_H`.
    pub fn codim(&self) -> f64 {
        (self.d - self.geometry.d_h) as f64
    }

    /// Conjugate exponent `p/(p-1)` (infinite for `p = 1`).
    pub fn q(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    fn k_inf(&self) -> Option<usize> {
        self.geometry.k_inf.value()
    }
}

/// Hardy constant `a_p = (D + m - p)/p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyConstant {
    pub a_p: f64,
    pub a_p_pow: f64,
    /// `D + m - p`; the inequality holds when this is positive.
    pub b_p: f64,
    pub valid: bool,
}

pub fn hardy_from(codim: f64, p: f64, delta: f64, delta_prime: f64) -> HardyConstant {
    let b_p = codim + delta.min(delta_prime) - p;
    let a_p = b_p / p;
    HardyConstant { a_p, a_p_pow: signed_pow(a_p, p), b_p, valid: b_p > 0.0 }
}

pub fn hardy_constant(spec: &ProblemSpec) -> HardyConstant {
    hardy_from(spec.codim(), spec.p, spec.weights.delta, spec.weights.delta_prime)
}

/// `x^p` keeping the sign of `x` so invalid configurations stay readable.
fn signed_pow(x: f64, p: f64) -> f64 {
    x.signum() * x.abs().powf(p)
}

/// Constant `((p - 1 - M)/p)^p` of the Hardy inequality on a convex domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexHardyConstant {
    pub value: f64,
    pub valid: bool,
}

pub fn hardy_convex_from(p: f64, delta: f64, delta_prime: f64) -> ConvexHardyConstant {
    let t = p - 1.0 - delta.max(delta_prime);
    ConvexHardyConstant { value: signed_pow(t / p, p), valid: t > 0.0 }
}

pub fn hardy_constant_convex(spec: &ProblemSpec) -> ConvexHardyConstant {
    hardy_convex_from(spec.p, spec.weights.delta, spec.weights.delta_prime)
}

fn check_rellich_domain(p: f64, delta: f64, delta_prime: f64) -> Result<()> {
    for (name, v) in [("delta", delta), ("delta_prime", delta_prime)] {
        if !(0.0..2.0).contains(&v) {
            return Err(Error::ExponentDomain(format!("{name} = {v}")));
        }
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("Rellich constants need p > 1, got {p}")));
    }
    Ok(())
}

/// `(α_p, α'_p) = ((2-δ)(p-1), (2-δ')(p-1))`.
pub fn rellich_exponents_from(p: f64, delta: f64, delta_prime: f64) -> Result<(f64, f64)> {
    check_rellich_domain(p, delta, delta_prime)?;
    Ok(((2.0 - delta) * (p - 1.0), (2.0 - delta_prime) * (p - 1.0)))
}

pub fn rellich_exponents(spec: &ProblemSpec) -> Result<(f64, f64)> {
    rellich_exponents_from(spec.p, spec.weights.delta, spec.weights.delta_prime)
}

/// `b_α = (D + m)(α∧α') - (α∨α')(α∨α' + 2)`.
pub fn b_alpha_from(codim: f64, min_delta: f64, alpha: f64, alpha_prime: f64) -> f64 {
    let lo = alpha.min(alpha_prime);
    let hi = alpha.max(alpha_prime);
    (codim + min_delta) * lo - hi * (hi + 2.0)
}

pub fn b_alpha(spec: &ProblemSpec, alpha: f64, alpha_prime: f64) -> f64 {
    b_alpha_from(spec.codim(), spec.weights.min_exponent(), alpha, alpha_prime)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RellichConstants {
    pub alpha_p: f64,
    pub alpha_prime_p: f64,
    pub b_alpha_p: f64,
    pub gamma_p: f64,
    pub c_p: f64,
    #[serde(rename = "C_p")]
    pub big_c_p: f64,
    /// Left side `D + p m - 2p` of the validity condition.
    pub condition_lhs: f64,
    /// Right side `2p |δ-δ'| / (2 - M)`.
    pub condition_rhs: f64,
    /// Condition holds and `b_{α_p} > 0`.
    pub valid: bool,
}

pub fn rellich_from(codim: f64, p: f64, delta: f64, delta_prime: f64) -> Result<RellichConstants> {
    let (alpha_p, alpha_prime_p) = rellich_exponents_from(p, delta, delta_prime)?;
    let m = delta.min(delta_prime);
    let big_m = delta.max(delta_prime);
    let b = b_alpha_from(codim, m, alpha_p, alpha_prime_p);
    let hi = alpha_p.max(alpha_prime_p);
    let gamma_p = b / (hi * hi);
    let c_p = (p + gamma_p * (p - 1.0)) * b / (p * p);
    let big_c_p = (p - 1.0) * codim * (codim + p * m - 2.0 * p) / (p * p);
    let condition_lhs = codim + p * m - 2.0 * p;
    let condition_rhs = 2.0 * p * (delta - delta_prime).abs() / (2.0 - big_m);
    // With equality in the condition and δ = δ' one gets b = 0, so the strict
    // positivity of b is required separately.
    let valid = condition_lhs >= condition_rhs && b > 0.0;
    Ok(RellichConstants {
        alpha_p,
        alpha_prime_p,
        b_alpha_p: b,
        gamma_p,
        c_p,
        big_c_p,
        condition_lhs,
        condition_rhs,
        valid,
    })
}

pub fn rellich_constants(spec: &ProblemSpec) -> Result<RellichConstants> {
    rellich_from(spec.codim(), spec.p, spec.weights.delta, spec.weights.delta_prime)
}

/// `c_p(δ, 0) = (p-1) D (D(1-δ/2) - 2p)(1-δ/2) / p^2`.
pub fn rellich_mixed_zero_from(codim: f64, p: f64, delta: f64) -> Result<f64> {
    check_rellich_domain(p, delta, 0.0)?;
    let t = 1.0 - delta / 2.0;
    Ok((p - 1.0) * codim * (codim * t - 2.0 * p) * t / (p * p))
}

/// `c_p(δ, 0)` for a spec whose weight has one vanishing exponent.
pub fn rellich_constant_mixed_zero(spec: &ProblemSpec) -> Result<f64> {
    let w = &spec.weights;
    if w.delta_prime != 0.0 && w.delta != 0.0 {
        return Err(Error::InvalidParameter("one of delta, delta_prime must vanish".into()));
    }
    rellich_mixed_zero_from(spec.codim(), spec.p, w.max_exponent())
}

/// The two closed forms of the `L_2` Rellich constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Rellich {
    pub a_2: f64,
    /// `(1 - m/2)^2`.
    pub nu: f64,
    /// `(a_2^2 - ν)^2`.
    pub via_hardy: f64,
    /// `(D (D + 2m - 4) / 4)^2`.
    pub closed_form: f64,
    /// `D + 2m - 4 > 0`.
    pub valid: bool,
}

pub fn l2_rellich_from(codim: f64, min_delta: f64) -> L2Rellich {
    let a_2 = (codim + min_delta - 2.0) / 2.0;
    let nu = (1.0 - min_delta / 2.0).powi(2);
    let via_hardy = (a_2 * a_2 - nu).powi(2);
    let closed_form = (codim * (codim + 2.0 * min_delta - 4.0) / 4.0).powi(2);
    L2Rellich { a_2, nu, via_hardy, closed_form, valid: codim + 2.0 * min_delta - 4.0 > 0.0 }
}

pub fn rellich_l2_constant(spec: &ProblemSpec) -> Result<L2Rellich> {
    if spec.p != 2.0 {
        return Err(Error::InvalidParameter(format!("L2 constant needs p = 2, got {}", spec.p)));
    }
    Ok(l2_rellich_from(spec.codim(), spec.weights.min_exponent()))
}

/// Why a status was assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// The validity condition of the inequality fails.
    ConditionFails,
    /// `K` is a point; lower and upper bound coincide.
    PointBody,
    /// `K` is a point, `δ ≠ δ'`; upper bound from the local and infinity estimates.
    PointBodyMixedExponents,
    /// `1 <= k <= d-1` and `δ <= δ'`: the local upper bound matches.
    LowerDimensionalLocal,
    /// `1 <= k <= d-1` and `k_inf = k`: the bound at infinity matches.
    FullGrowthAtInfinity,
    /// Only the local upper bound `((D + δ - p)/p)^p`-type estimate applies.
    LocalUpperBound,
    /// `k_inf = k` gives an upper bound but it does not meet the lower bound.
    GrowthUpperBound,
    /// `p = 2`: lower bound `C_2^2` matched by an upper bound.
    QuadraticMatched,
    /// `K` is full dimensional; no closed-form upper bound is available.
    NoUpperBound,
}

/// What is known about an optimal constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OptimalStatus {
    Exact { value: f64, reason: Reason },
    Bracket { lower: f64, upper: f64, reason: Reason },
    Unknown { lower: Option<f64>, reason: Reason },
}

impl OptimalStatus {
    pub fn lower(&self) -> Option<f64> {
        match *self {
            OptimalStatus::Exact { value, .. } => Some(value),
            OptimalStatus::Bracket { lower, .. } => Some(lower),
            OptimalStatus::Unknown { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> Option<f64> {
        match *self {
            OptimalStatus::Exact { value, .. } => Some(value),
            OptimalStatus::Bracket { upper, .. } => Some(upper),
            OptimalStatus::Unknown { .. } => None,
        }
    }

    pub fn reason(&self) -> Reason {
        match *self {
            OptimalStatus::Exact { reason, .. }
            | OptimalStatus::Bracket { reason, .. }
            | OptimalStatus::Unknown { reason, .. } => reason,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, OptimalStatus::Exact { .. })
    }
}

fn bracket_or_exact(lower: f64, upper: f64, reason: Reason) -> OptimalStatus {
    if (upper - lower).abs() <= CONSTANT_TOL * (1.0 + lower.abs()) {
        OptimalStatus::Exact { value: lower, reason }
    } else {
        OptimalStatus::Bracket { lower, upper, reason }
    }
}

/// What is known about the optimal Hardy constant `μ_p`.
pub fn optimal_hardy_case(spec: &ProblemSpec) -> OptimalStatus {
    let h = hardy_constant(spec);
    if !h.valid {
        return OptimalStatus::Unknown { lower: None, reason: Reason::ConditionFails };
    }
    let (d, k) = (spec.d, spec.k());
    let w = &spec.weights;
    if k == 0 {
        return OptimalStatus::Exact { value: h.a_p_pow, reason: Reason::PointBody };
    }
    if k < d {
        if w.delta <= w.delta_prime {
            return OptimalStatus::Exact { value: h.a_p_pow, reason: Reason::LowerDimensionalLocal };
        }
        if spec.k_inf() == Some(k) {
            return OptimalStatus::Exact { value: h.a_p_pow, reason: Reason::FullGrowthAtInfinity };
        }
        let upper = ((spec.codim() + w.delta - spec.p) / spec.p).powf(spec.p);
        return bracket_or_exact(h.a_p_pow, upper, Reason::LocalUpperBound);
    }
    OptimalStatus::Unknown { lower: Some(h.a_p_pow), reason: Reason::NoUpperBound }
}

/// `((p-1) D (D + p e - 2p) / p^2)^p`, or `None` when the base is not positive.
fn rellich_bound(codim: f64, p: f64, e: f64) -> Option<f64> {
    let base = (p - 1.0) * codim * (codim + p * e - 2.0 * p) / (p * p);
    (base > 0.0).then(|| base.powf(p))
}

/// What is known about the optimal Rellich constant `ν_p`.
pub fn optimal_rellich_case(spec: &ProblemSpec) -> Result<OptimalStatus> {
    let r = rellich_constants(spec)?;
    let w = &spec.weights;
    let p = spec.p;
    let codim = spec.codim();
    let (d, k) = (spec.d, spec.k());
    let m = w.min_exponent();
    let l2 = (p == 2.0).then(|| l2_rellich_from(codim, m)).filter(|l| l.valid);
    let lower = if let Some(l) = l2 {
        l.closed_form
    } else if r.valid {
        r.c_p.powf(p)
    } else {
        return Ok(OptimalStatus::Unknown { lower: None, reason: Reason::ConditionFails });
    };
    let equal = w.delta == w.delta_prime;
    if k == 0 {
        let Some(upper) = rellich_bound(codim, p, m) else {
            return Ok(OptimalStatus::Unknown { lower: Some(lower), reason: Reason::NoUpperBound });
        };
        let reason = if equal {
            Reason::PointBody
        } else if l2.is_some() {
            Reason::QuadraticMatched
        } else {
            Reason::PointBodyMixedExponents
        };
        return Ok(bracket_or_exact(lower, upper, reason));
    }
    if k < d {
        let local = rellich_bound(codim, p, w.delta);
        let growth = if spec.k_inf() == Some(k) { rellich_bound(codim, p, m) } else { None };
        return Ok(match (local, growth) {
            (_, Some(g)) => {
                let upper = local.map_or(g, |l| l.min(g));
                let reason = if equal {
                    Reason::FullGrowthAtInfinity
                } else if l2.is_some() {
                    Reason::QuadraticMatched
                } else {
                    Reason::GrowthUpperBound
                };
                bracket_or_exact(lower, upper, reason)
            }
            (Some(l), None) => bracket_or_exact(lower, l, Reason::LocalUpperBound),
            (None, None) => OptimalStatus::Unknown { lower: Some(lower), reason: Reason::NoUpperBound },
        });
    }
    Ok(OptimalStatus::Unknown { lower: Some(lower), reason: Reason::NoUpperBound })
}

/// Every constant for one spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub d: usize,
    pub d_h: usize,
    pub k: usize,
    pub k_inf: Option<usize>,
    pub p: f64,
    pub q: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub hardy_a_p: f64,
    pub hardy_a_p_pow: f64,
    pub hardy_b_p: f64,
    pub hardy_valid: bool,
    pub hardy_convex: f64,
    pub hardy_convex_valid: bool,
    pub rellich_alpha_p: Option<f64>,
    pub rellich_alpha_prime_p: Option<f64>,
    pub rellich_b_alpha_p: Option<f64>,
    pub rellich_gamma_p: Option<f64>,
    pub rellich_c_p: Option<f64>,
    #[serde(rename = "rellich_C_p")]
    pub rellich_big_c_p: Option<f64>,
    pub rellich_valid: bool,
    /// Why Rellich constants are absent (`p = 1` or an exponent outside `[0, 2)`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rellich_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2_rellich: Option<L2Rellich>,
    pub mu_p_status: OptimalStatus,
    pub nu_p_status: OptimalStatus,
}

pub fn constants_report(spec: &ProblemSpec) -> ConstantsReport {
    let h = hardy_constant(spec);
    let hc = hardy_constant_convex(spec);
    let r = rellich_constants(spec);
    let nu = optimal_rellich_case(spec);
    let l2 = rellich_l2_constant(spec).ok();
    let (rv, rerr) = match &r {
        Ok(r) => (Some(*r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ConstantsReport {
        d: spec.d,
        d_h: spec.d_h(),
        k: spec.k(),
        k_inf: spec.k_inf(),
        p: spec.p,
        q: spec.q(),
        delta: spec.weights.delta,
        delta_prime: spec.weights.delta_prime,
        hardy_a_p: h.a_p,
        hardy_a_p_pow: h.a_p_pow,
        hardy_b_p: h.b_p,
        hardy_valid: h.valid,
        hardy_convex: hc.value,
        hardy_convex_valid: hc.valid,
        rellich_alpha_p: rv.map(|r| r.alpha_p),
        rellich_alpha_prime_p: rv.map(|r| r.alpha_prime_p),
        rellich_b_alpha_p: rv.map(|r| r.b_alpha_p),
        rellich_gamma_p: rv.map(|r| r.gamma_p),
        rellich_c_p: rv.map(|r| r.c_p),
        rellich_big_c_p: rv.map(|r| r.big_c_p),
        rellich_valid: rv.is_some_and(|r| r.valid),
        rellich_error: rerr,
        l2_rellich: l2,
        mu_p_status: optimal_hardy_case(spec),
        nu_p_status: nu.unwrap_or(OptimalStatus::Unknown { lower: None, reason: Reason::ConditionFails }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn hardy_examples() {
        let h = hardy_from(3.0, 2.0, 0.0, 0.0);
        assert!(h.valid && close(h.a_p, 0.5) && close(h.a_p_pow, 0.25));
        assert!(!hardy_from(1.0, 2.0, 0.0, 0.0).valid);
        let h = hardy_from(4.0, 3.0, 2.0, 1.0);
        assert!(h.valid && close(h.a_p, 2.0 / 3.0) && close(h.a_p_pow, 8.0 / 27.0));
    }

    #[test]
    fn convex_domain_examples() {
        let c = hardy_convex_from(2.0, 0.0, 0.0);
        assert!(c.valid && close(c.value, 0.25));
        assert!(!hardy_convex_from(2.0, 1.0, 1.0).valid);
        assert!(close(hardy_convex_from(4.0, 1.0, 2.0).value, 0.25f64.powi(4)));
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(rellich_exponents_from(2.0, 0.0, 0.0).unwrap(), (2.0, 2.0));
        assert_eq!(rellich_exponents_from(2.0, 1.0, 0.0).unwrap(), (1.0, 2.0));
        assert_eq!(rellich_exponents_from(3.0, 0.5, 0.5).unwrap().0, 3.0);
        assert!(matches!(rellich_exponents_from(2.0, 3.0, 0.0), Err(Error::ExponentDomain(_))));
    }

    #[test]
    fn b_alpha_examples() {
        assert_eq!(b_alpha_from(5.0, 0.0, 2.0, 2.0), 2.0);
        assert_eq!(b_alpha_from(5.0, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn rellich_chain_examples() {
        let r = rellich_from(5.0, 2.0, 0.0, 0.0).unwrap();
        assert_eq!((r.alpha_p, r.b_alpha_p, r.gamma_p), (2.0, 2.0, 0.5));
        assert!(close(r.c_p, 1.25) && close(r.big_c_p, 1.25) && r.valid);
        let r = rellich_from(12.0, 2.0, 0.0, 1.0).unwrap();
        assert_eq!((r.condition_lhs, r.condition_rhs), (8.0, 4.0));
        assert!(r.valid && close(r.big_c_p, 24.0) && r.c_p <= 24.0);
    }

    #[test]
    fn mixed_zero_examples() {
        assert!(close(rellich_mixed_zero_from(12.0, 2.0, 1.0).unwrap(), 3.0));
        let c00 = rellich_mixed_zero_from(7.0, 3.0, 0.0).unwrap();
        assert!(close(c00, rellich_from(7.0, 3.0, 0.0, 0.0).unwrap().big_c_p));
    }

    #[test]
    fn l2_examples() {
        let l = l2_rellich_from(6.0, 0.0);
        assert_eq!((l.a_2, l.nu), (2.0, 1.0));
        assert!(close(l.via_hardy, 9.0) && close(l.closed_form, 9.0));
        assert!(close(rellich_from(6.0, 2.0, 0.0, 0.0).unwrap().big_c_p.powi(2), 9.0));
        let l = l2_rellich_from(6.0, 2.0);
        assert_eq!(l.nu, 0.0);
        assert!(close(l.via_hardy, l.a_2.powi(4)));
    }

    #[test]
    fn optimal_hardy_examples() {
        let s = ProblemSpec::with_dims(3, 0, 2.0, WeightParams::power(0.0)).unwrap();
        assert_eq!(optimal_hardy_case(&s), OptimalStatus::Exact { value: 0.25, reason: Reason::PointBody });
        let s = ProblemSpec::with_dims(4, 1, 2.0, WeightParams::new(0.0, 1.0)).unwrap();
        assert_eq!(
            optimal_hardy_case(&s),
            OptimalStatus::Exact { value: 0.25, reason: Reason::LowerDimensionalLocal }
        );
        // Quadrant times a segment in R^4: k = 3, k_inf = 2, δ > δ'.
        let slab = ConvexBody::Box {
            lower: vec![0.0, 0.0, 0.0, 0.0],
            upper: vec![f64::INFINITY, f64::INFINITY, 1.0, 0.0],
        };
        let s = ProblemSpec::new(slab, 1.2, WeightParams::new(1.0, 0.5)).unwrap();
        assert_eq!((s.k(), s.geometry.k_inf.value()), (3, Some(2)));
        assert!(matches!(optimal_hardy_case(&s), OptimalStatus::Bracket { reason: Reason::LocalUpperBound, .. }));
    }

    #[test]
    fn optimal_rellich_examples() {
        let s = ProblemSpec::with_dims(5, 0, 2.0, WeightParams::power(0.0)).unwrap();
        let st = optimal_rellich_case(&s).unwrap();
        assert!(st.is_exact() && close(st.lower().unwrap(), 1.5625));
        let s = ProblemSpec::with_dims(6, 1, 2.0, WeightParams::power(1.0)).unwrap();
        let st = optimal_rellich_case(&s).unwrap();
        assert!(st.is_exact() && close(st.lower().unwrap(), (5.0 * 3.0 / 4.0f64).powi(2)));
        let s = ProblemSpec::with_dims(9, 0, 3.0, WeightParams::new(0.5, 0.0)).unwrap();
        let st = optimal_rellich_case(&s).unwrap();
        assert!(matches!(st, OptimalStatus::Bracket { reason: Reason::PointBodyMixedExponents, .. }));
    }

    #[test]
    fn spec_json_round_trip() {
        let s = ProblemSpec::with_dims(4, 1, 2.0, WeightParams::new(0.0, 1.0)).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        let back: ProblemSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"body":{"kind":"single_point","point":[0,0]},"p":2,"extra":1}"#;
        assert!(serde_json::from_str::<ProblemSpec>(bad).is_err());
        let mismatch = r#"{"d":3,"body":{"kind":"single_point","point":[0,0]},"p":2}"#;
        assert!(serde_json::from_str::<ProblemSpec>(mismatch).is_err());
    }

    proptest! {
        #[test]
        fn equal_exponents_collapse_chain(codim in 1usize..12, p in 1.05..4.0f64, delta in 0.0..1.95f64) {
            let r = rellich_from(codim as f64, p, delta, delta).unwrap();
            prop_assume!(r.valid);
            prop_assert!((r.c_p - r.big_c_p).abs() <= 1e-12 * (1.0 + r.big_c_p.abs()));
        }

        #[test]
        fn valid_chain_is_ordered(codim in 1usize..16, p in 1.05..4.0f64, d1 in 0.0..1.95f64, d2 in 0.0..1.95f64) {
            let r = rellich_from(codim as f64, p, d1, d2).unwrap();
            prop_assume!(r.valid);
            prop_assert!(r.c_p > 0.0);
            prop_assert!(r.c_p <= r.big_c_p + 1e-12 * (1.0 + r.big_c_p));
        }

        #[test]
        fn strict_condition_gives_positive_b(codim in 1usize..16, p in 1.05..4.0f64, d1 in 0.0..1.95f64, d2 in 0.0..1.95f64) {
            let r = rellich_from(codim as f64, p, d1, d2).unwrap();
            prop_assume!(r.condition_lhs > r.condition_rhs + 1e-9);
            prop_assert!(r.b_alpha_p > 0.0);
        }

        #[test]
        fn b_alpha_scaling(codim in 1.0..12.0f64, m in 0.0..2.0f64, a1 in 0.0..5.0f64, a2 in 0.0..5.0f64, g in 0.0..3.0f64) {
            let lhs = b_alpha_from(codim, m, (1.0 + g) * a1, (1.0 + g) * a2);
            let hi = a1.max(a2);
            let rhs = (1.0 + g) * (b_alpha_from(codim, m, a1, a2) - g * hi * hi);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }

        #[test]
        fn mixed_zero_matches_general_chain(codim in 1usize..16, p in 1.05..4.0f64, delta in 0.0..1.95f64) {
            let a = rellich_mixed_zero_from(codim as f64, p, delta).unwrap();
            let b = rellich_from(codim as f64, p, delta, 0.0).unwrap().c_p;
            let c = rellich_from(codim as f64, p, 0.0, delta).unwrap().c_p;
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            prop_assert!((a - c).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn l2_identity(codim in 1.0..20.0f64, m in 0.0..3.0f64) {
            let l = l2_rellich_from(codim, m);
            prop_assert!((l.via_hardy - l.closed_form).abs() <= 1e-12 * (1.0 + l.closed_form));
        }
    }
}
