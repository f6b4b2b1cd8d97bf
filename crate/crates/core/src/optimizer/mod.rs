//! Trial families indexed by `n`, sweeps in `n` with extrapolation,
//! golden-section search over the exponent of power trials, and two-sided
//! brackets for the optimal Hardy and Rellich constants.

mod export;

pub use export::{spec_hash, sweep_csv, write_sweep_csv, SCHEMA_VERSION};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{hardy_constant, optimal_hardy_case, optimal_rellich_case, rellich_constants, OptimalStatus, ProblemSpec};
use crate::error::{Error, Result};
use crate::functionals::{hardy_quotient, rellich_quotient, QuadratureSpec, QuotientResult};
use crate::geometry::ConvexBody;
use crate::linalg::norm;
use crate::profiles::{Envelope, Frame, Profile1D, TrialFunction};
use crate::sampling::stream_rng;

/// Which quotient is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Hardy,
    Rellich,
}

/// Where the trials concentrate: near `K` or far away from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `d -> 0`, where `c(d) ~ d^δ`.
    Local,
    /// `d -> ∞`, where `c(d) ~ d^δ'`.
    Growth,
}

impl Regime {
    /// The regime governed by the smaller weight exponent.
    pub fn for_spec(spec: &ProblemSpec) -> Self {
        if spec.weights.delta <= spec.weights.delta_prime {
            Regime::Local
        } else {
            Regime::Growth
        }
    }
}

/// A sequence of trial functions indexed by `n > 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrialFamily {
    /// `χ_n(d)`: log ramp on `[1/n, 1]` times the cutoff on `[1, 2]`.
    Chi,
    /// `σ_n(d)`: the `C^1` variant of `χ_n`, with bounded second derivative.
    Sigma,
    /// `d^{-α} ψ_n(d/s)` with `ψ_n` rising on `[1/n, 1]`, equal to 1 on
    /// `[1, n]`, falling on `[n, κn]`. `ψ` is the log ramp, or the `C^1`
    /// ramp when `smooth` is set. The scale `s` depends on the regime.
    /// Around a lower-dimensional unbounded `K` this is the distance
    /// factor of a product trial whose envelope has radius
    /// `envelope_factor` times the outer support radius.
    PowerPlateau {
        alpha: f64,
        kappa: f64,
        regime: Regime,
        #[serde(default)]
        smooth: bool,
        #[serde(default = "default_envelope_factor")]
        envelope_factor: f64,
    },
}

fn default_envelope_factor() -> f64 {
    1e3
}

/// Plateau width factor of the extremal families.
pub const DEFAULT_KAPPA: f64 = 10.0;

fn bounding_radius(body: &ConvexBody) -> f64 {
    match body {
        ConvexBody::SinglePoint { point } => norm(point),
        ConvexBody::Ball { center, radius } => norm(center) + radius,
        ConvexBody::Box { lower, upper } => {
            lower.iter().zip(upper).map(|(l, u)| l.abs().max(u.abs()).powi(2)).sum::<f64>().sqrt()
        }
        ConvexBody::VPolytope { vertices } => vertices.iter().map(|v| norm(v)).fold(0.0, f64::max),
        _ => 0.0,
    }
}

fn bounded(body: &ConvexBody) -> bool {
    crate::profiles::is_bounded(body)
}

/// Codimension seen by trials in `regime`: a bounded body looks like a
/// point from far away.
fn effective_codim(spec: &ProblemSpec, regime: Regime) -> f64 {
    match regime {
        Regime::Growth if bounded(&spec.body) => spec.d as f64,
        _ => spec.codim(),
    }
}

fn regime_exponent(spec: &ProblemSpec, regime: Regime) -> f64 {
    match regime {
        Regime::Local => spec.weights.delta,
        Regime::Growth => spec.weights.delta_prime,
    }
}

impl TrialFamily {
    /// Power plateau family whose Hardy quotients approach
    /// `((D + e - p)/p)^p`, `e` the weight exponent of the regime.
    pub fn hardy_extremal(spec: &ProblemSpec, regime: Regime) -> Self {
        let alpha = (effective_codim(spec, regime) + regime_exponent(spec, regime) - spec.p) / spec.p;
        TrialFamily::PowerPlateau { alpha, kappa: DEFAULT_KAPPA, regime, smooth: false, envelope_factor: default_envelope_factor() }
    }

    /// Twice differentiable power plateau family whose Rellich quotients
    /// approach `((p-1) D (D + pe - 2p)/p^2)^p`.
    pub fn rellich_extremal(spec: &ProblemSpec, regime: Regime) -> Self {
        let p = spec.p;
        let alpha = (effective_codim(spec, regime) + p * regime_exponent(spec, regime) - 2.0 * p) / p;
        TrialFamily::PowerPlateau { alpha, kappa: DEFAULT_KAPPA, regime, smooth: true, envelope_factor: default_envelope_factor() }
    }

    /// Short identifier used in exports.
    pub fn id(&self) -> String {
        match self {
            TrialFamily::Chi => "chi".into(),
            TrialFamily::Sigma => "sigma".into(),
            TrialFamily::PowerPlateau { alpha, kappa, regime, smooth, .. } => {
                let r = match regime {
                    Regime::Local => "local",
                    Regime::Growth => "growth",
                };
                format!("{}-plateau-{r}-a{alpha}-k{kappa}", if *smooth { "sigma" } else { "chi" })
            }
        }
    }

    /// Exponent `e` of the remainder `(log n)^{-e}` in the sweep fit.
    fn fit_exponent(&self, p: f64) -> f64 {
        match self {
            TrialFamily::Chi | TrialFamily::Sigma => p - 1.0,
            TrialFamily::PowerPlateau { .. } => 1.0,
        }
    }

    /// The `n`-th trial on `spec.body`.
    pub fn trial(&self, spec: &ProblemSpec, n: f64) -> Result<TrialFunction> {
        if !(n > 1.0 && n.is_finite()) {
            return Err(Error::InvalidParameter(format!("sequence index must be finite and > 1, got {n}")));
        }
        match self {
            TrialFamily::Chi => Ok(TrialFunction::radial(Profile1D::chi_sequence(n)?)),
            TrialFamily::Sigma => Ok(TrialFunction::radial(Profile1D::sigma_sequence(n)?)),
            &TrialFamily::PowerPlateau { alpha, kappa, regime, smooth, envelope_factor } => {
                if !(kappa > 1.0) || !(envelope_factor > 1.0) {
                    return Err(Error::InvalidParameter("need kappa > 1 and envelope_factor > 1".into()));
                }
                let scale = match regime {
                    Regime::Local => 1e-3 / (kappa * n),
                    Regime::Growth => 1e3 * n * (1.0 + bounding_radius(&spec.body)),
                };
                let plateau = if smooth { Profile1D::sigma_plateau(n, kappa)? } else { Profile1D::chi_plateau(n, kappa)? }.scaled(scale);
                let profile = Profile1D::product(vec![Profile1D::Power { alpha }, plateau]);
                if bounded(&spec.body) {
                    return Ok(TrialFunction::radial(profile));
                }
                let frame = Frame::for_body(&spec.body)?;
                let outer = envelope_factor * kappa * n * scale;
                let envelope = Envelope::new(vec![0.0; frame.k()], 0.5 * outer, outer)?;
                Ok(TrialFunction::product(envelope, profile))
            }
        }
    }
}

/// Least-squares fit `q(n) = q_inf + A (log n)^{-e}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub q_inf: f64,
    pub amplitude: f64,
    pub exponent: f64,
    /// Root mean square residual of the fit.
    pub residual: f64,
    /// Standard error of `q_inf`, zero with exactly two points.
    pub q_inf_error: f64,
    /// Set when the model has no analytic backing for this functional.
    pub heuristic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub functional: Functional,
    pub family: TrialFamily,
    pub n: Vec<f64>,
    pub quotients: Vec<f64>,
    pub errors: Vec<f64>,
    pub lower_bound: Option<f64>,
    pub fit: SweepFit,
    /// Quotients decrease in `n` up to their error estimates.
    pub monotone: bool,
}

impl SweepResult {
    /// Smallest quotient computed.
    pub fn best(&self) -> f64 {
        self.quotients.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest `quotient - lower_bound`.
    pub fn min_margin(&self) -> Option<f64> {
        self.lower_bound.map(|l| self.quotients.iter().map(|q| q - l).fold(f64::INFINITY, f64::min))
    }
}

/// `{10^2, 10^3, 10^4, 10^5}`.
pub fn default_n_list() -> Vec<f64> {
    vec![1e2, 1e3, 1e4, 1e5]
}

/// Indices up to `10^30`. The excess of the power plateau families decays
/// like `1/log n`, so the sweeps that realise upper bounds go this deep.
pub fn deep_n_list() -> Vec<f64> {
    vec![1e2, 1e4, 1e8, 1e12, 1e20, 1e30]
}

fn fit(n: &[f64], q: &[f64], exponent: f64, heuristic: bool) -> SweepFit {
    let x: Vec<f64> = n.iter().map(|n| n.ln().powf(-exponent)).collect();
    let len = x.len() as f64;
    let mx = x.iter().sum::<f64>() / len;
    let mq = q.iter().sum::<f64>() / len;
    let sxx: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
    let sxq: f64 = x.iter().zip(q).map(|(x, q)| (x - mx) * (q - mq)).sum();
    let amplitude = if sxx > 0.0 { sxq / sxx } else { 0.0 };
    let q_inf = mq - amplitude * mx;
    let ss: f64 = x.iter().zip(q).map(|(x, q)| (q - q_inf - amplitude * x).powi(2)).sum();
    let residual = (ss / len).sqrt();
    let q_inf_error = if x.len() > 2 && sxx > 0.0 {
        let s2 = ss / (len - 2.0);
        (s2 * (1.0 / len + mx * mx / sxx)).sqrt()
    } else {
        0.0
    };
    SweepFit { q_inf, amplitude, exponent, residual, q_inf_error, heuristic }
}

fn quotient(spec: &ProblemSpec, functional: Functional, trial: &TrialFunction, quad: &QuadratureSpec) -> Result<QuotientResult> {
    match functional {
        Functional::Hardy => hardy_quotient(spec, trial, quad),
        Functional::Rellich => rellich_quotient(spec, trial, quad),
    }
}

fn lower_bound(spec: &ProblemSpec, functional: Functional) -> Option<f64> {
    match functional {
        Functional::Hardy => {
            let h = hardy_constant(spec);
            h.valid.then_some(h.a_p_pow)
        }
        Functional::Rellich => rellich_constants(spec).ok().filter(|r| r.valid).map(|r| r.c_p.powf(spec.p)),
    }
}

/// Quotients of `family` at every `n` (evaluated in parallel) and the
/// extrapolated limit.
pub fn sequence_sweep(spec: &ProblemSpec, functional: Functional, family: &TrialFamily, n_list: &[f64], quad: &QuadratureSpec) -> Result<SweepResult> {
    if n_list.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n_list.len() });
    }
    let results: Vec<Result<QuotientResult>> = n_list
        .par_iter()
        .map(|&n| {
            let trial = family.trial(spec, n)?;
            quotient(spec, functional, &trial, quad)
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let quotients: Vec<f64> = results.iter().map(|r| r.quotient).collect();
    let errors: Vec<f64> = results.iter().map(|r| r.error).collect();
    let monotone = n_list
        .windows(2)
        .zip(quotients.windows(2).zip(errors.windows(2)))
        .all(|(n, (q, e))| n[1] <= n[0] || q[1] <= q[0] + e[0] + e[1] + 1e-12 * q[0].abs());
    let fit = fit(n_list, &quotients, family.fit_exponent(spec.p), functional == Functional::Rellich);
    Ok(SweepResult { functional, family: family.clone(), n: n_list.to_vec(), quotients, errors, lower_bound: lower_bound(spec, functional), fit, monotone })
}

/// Settings of the exponent search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSearch {
    /// Index of the log ramp that localises `d^{-α}` away from `K`.
    pub ramp_n: f64,
    /// The cutoff falls from 1 to 0 on `[1, cutoff_outer]`.
    pub cutoff_outer: f64,
    /// Width of the final bracket.
    pub alpha_tol: f64,
    pub starts: usize,
    pub seed: u64,
}

impl Default for AlphaSearch {
    fn default() -> Self {
        Self { ramp_n: 1e8, cutoff_outer: 100.0, alpha_tol: 1e-4, starts: 3, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaMinimum {
    pub alpha: f64,
    pub quotient: f64,
    pub error: f64,
    /// `(α, q)` found from each random start.
    pub starts: Vec<(f64, f64)>,
    /// All starts agree with the main search within tolerance.
    pub agree: bool,
}

/// `d^{-α}` times the log ramp and the cutoff of `search`.
pub fn power_trial(alpha: f64, search: &AlphaSearch) -> Result<TrialFunction> {
    let profile = Profile1D::product(vec![Profile1D::log_ramp(search.ramp_n)?, Profile1D::smooth_cutoff_on(1.0, search.cutoff_outer)?]);
    Ok(TrialFunction::power_localized(alpha, profile))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    if b - a <= tol {
        let m = 0.5 * (a + b);
        return Ok((m, f(m)?));
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Golden-section minimum of the Hardy quotient of [`power_trial`] over
/// `α ∈ [lo, hi]`.
///
/// Every random start splits the bracket at a random point and searches
/// both halves; disagreement with the main search flags a non-unimodal
/// quotient.
pub fn minimize_alpha(spec: &ProblemSpec, lo: f64, hi: f64, search: &AlphaSearch, quad: &QuadratureSpec) -> Result<AlphaMinimum> {
    if lo > hi {
        return Err(Error::InvalidParameter(format!("empty bracket [{lo}, {hi}]")));
    }
    let wall = (spec.codim() + spec.weights.delta - spec.p) / spec.p;
    if hi >= wall {
        return Err(Error::Divergent(format!("alpha = {hi} is not below the integrability limit {wall}")));
    }
    let eval = |a: f64| -> Result<QuotientResult> { hardy_quotient(spec, &power_trial(a, search)?, quad) };
    let q = |a: f64| eval(a).map(|r| r.quotient);
    let (alpha, _) = golden(q, lo, hi, search.alpha_tol)?;
    let best = eval(alpha)?;
    let mut rng = stream_rng(search.seed, 0xA1FA);
    let mut starts = vec![];
    let mut agree = true;
    for _ in 0..search.starts {
        if hi - lo <= search.alpha_tol {
            break;
        }
        let split = rng.random_range(lo..hi);
        let left = golden(q, lo, split, search.alpha_tol)?;
        let right = golden(q, split, hi, search.alpha_tol)?;
        let s = if left.1 <= right.1 { left } else { right };
        agree &= (s.1 - best.quotient).abs() <= 10.0 * best.error + 1e-3 * best.quotient.abs();
        starts.push(s);
    }
    Ok(AlphaMinimum { alpha, quotient: best.quotient, error: best.error, starts, agree })
}

/// Settings of the numerical part of a bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketOptions {
    pub n_list: Vec<f64>,
    pub quad: QuadratureSpec,
}

impl Default for BracketOptions {
    fn default() -> Self {
        Self { n_list: deep_n_list(), quad: QuadratureSpec::radial(1e-8) }
    }
}

/// Two-sided bounds on an optimal constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub functional: Functional,
    /// Proven lower bound.
    pub lower: Option<f64>,
    /// Smallest of the known and the numerically realised upper bounds.
    pub upper: Option<f64>,
    pub theoretical_upper: Option<f64>,
    /// Smallest quotient realised by the extremal family.
    pub numerical_upper: Option<f64>,
    pub gap: Option<f64>,
    /// `numerical_upper - lower`.
    pub numerical_gap: Option<f64>,
    pub status: OptimalStatus,
    pub tags: Vec<String>,
    /// Why a side of the bracket is missing.
    pub diagnosis: Option<String>,
    pub sweep: Option<SweepResult>,
}

impl Bracket {
    /// `lower <= upper` within `tol` (relative to the lower bound).
    pub fn consistent(&self, tol: f64) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => l <= u + tol * (1.0 + l.abs()),
            _ => true,
        }
    }
}

fn assemble(functional: Functional, spec: &ProblemSpec, status: OptimalStatus, opts: &BracketOptions) -> Result<Bracket> {
    let lower = status.lower();
    let theoretical_upper = status.upper();
    let mut tags = vec![format!("{:?}", status.reason())];
    let mut diagnosis = None;
    let mut sweep = None;
    if lower.is_none() {
        diagnosis = Some(match functional {
            Functional::Hardy => "Hardy condition D + min(delta, delta') > p fails".to_string(),
            Functional::Rellich => "Rellich validity condition fails".to_string(),
        });
    } else {
        let regime = Regime::for_spec(spec);
        let family = match functional {
            Functional::Hardy => TrialFamily::hardy_extremal(spec, regime),
            Functional::Rellich => TrialFamily::rellich_extremal(spec, regime),
        };
        match sequence_sweep(spec, functional, &family, &opts.n_list, &opts.quad) {
            Ok(s) => {
                tags.push(family.id());
                sweep = Some(s);
            }
            Err(e @ (Error::Unsupported(_) | Error::SupportViolation(_) | Error::Divergent(_))) => {
                diagnosis = Some(format!("no numerical upper bound: {e}"));
            }
            Err(e) => return Err(e),
        }
    }
    let numerical_upper = sweep.as_ref().map(|s| s.best());
    let upper = match (theoretical_upper, numerical_upper) {
        (Some(t), Some(n)) => Some(t.min(n)),
        (a, b) => a.or(b),
    };
    let gap = lower.zip(upper).map(|(l, u)| u - l);
    let numerical_gap = lower.zip(numerical_upper).map(|(l, u)| u - l);
    let b = Bracket { functional, lower, upper, theoretical_upper, numerical_upper, gap, numerical_gap, status, tags, diagnosis, sweep };
    if let (Some(l), Some(u)) = (b.lower, b.upper) {
        let tol = 10.0 * opts.quad.rel_tol.max(1e-9);
        if !b.consistent(tol) {
            return Err(Error::InvertedBracket { lower: l, upper: u });
        }
    }
    Ok(b)
}

/// Bracket for the optimal Hardy constant.
pub fn bracket_mu(spec: &ProblemSpec, opts: &BracketOptions) -> Result<Bracket> {
    assemble(Functional::Hardy, spec, optimal_hardy_case(spec), opts)
}

/// Bracket for the optimal Rellich constant.
pub fn bracket_nu(spec: &ProblemSpec, opts: &BracketOptions) -> Result<Bracket> {
    let status = match optimal_rellich_case(spec) {
        Ok(s) => s,
        Err(e) => {
            let mut b = assemble(Functional::Rellich, spec, OptimalStatus::Unknown { lower: None, reason: crate::constants::Reason::ConditionFails }, opts)?;
            b.diagnosis = Some(e.to_string());
            return Ok(b);
        }
    };
    assemble(Functional::Rellich, spec, status, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightParams;

    fn point(d: usize, p: f64, w: WeightParams) -> ProblemSpec {
        ProblemSpec::new(ConvexBody::SinglePoint { point: vec![0.0; d] }, p, w).unwrap()
    }

    #[test]
    fn fit_recovers_model() {
        let n = [1e2, 1e3, 1e4, 1e5];
        let q: Vec<f64> = n.iter().map(|n: &f64| 0.25 + 0.7 / n.ln()).collect();
        let f = fit(&n, &q, 1.0, false);
        assert!((f.q_inf - 0.25).abs() < 1e-12 && (f.amplitude - 0.7).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let s = point(3, 2.0, WeightParams::power(0.0));
        let e = sequence_sweep(&s, Functional::Hardy, &TrialFamily::Chi, &[1e2, 1e3], &QuadratureSpec::default());
        assert_eq!(e.unwrap_err(), Error::TooFewPoints { needed: 3, got: 2 });
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden(|x| Ok((x - 0.3).powi(2)), 0.0, 1.0, 1e-8).unwrap();
        assert!((x - 0.3).abs() < 1e-7 && fx < 1e-13);
    }

    #[test]
    fn degenerate_alpha_bracket() {
        let s = point(3, 2.0, WeightParams::power(0.0));
        let m = minimize_alpha(&s, 0.3, 0.3, &AlphaSearch::default(), &QuadratureSpec::radial(1e-6)).unwrap();
        assert_eq!(m.alpha, 0.3);
    }

    #[test]
    fn alpha_wall_is_divergent() {
        let s = point(3, 2.0, WeightParams::power(0.0));
        let e = minimize_alpha(&s, 0.1, 0.5, &AlphaSearch::default(), &QuadratureSpec::radial(1e-6));
        assert!(matches!(e, Err(Error::Divergent(_))));
    }

    #[test]
    fn extremal_exponents() {
        let s = point(5, 2.0, WeightParams::power(0.0));
        match TrialFamily::rellich_extremal(&s, Regime::Local) {
            TrialFamily::PowerPlateau { alpha, .. } => assert!((alpha - 0.5).abs() < 1e-15),
            _ => unreachable!(),
        }
    }
}
