//! One-dimensional profiles on `(0, ∞)` with exact first and second
//! derivatives, and the spatial trial functions assembled from them.

mod trial;

pub use trial::{BoundTrial, Envelope, Frame, OperatorMethod, TrialFunction, TrialPoint};
pub(crate) use trial::{fd_operator, is_bounded, product_h, radial_h};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_log, local_exponent, QuadOptions, QuadResult};

/// Continuity class of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Smoothness {
    C0,
    C1,
    C2,
}

/// Value with first and second derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet { v: 0.0, d1: 0.0, d2: 0.0 };
    pub const ONE: Jet = Jet { v: 1.0, d1: 0.0, d2: 0.0 };

    fn mul(self, o: Jet) -> Jet {
        Jet { v: self.v * o.v, d1: self.d1 * o.v + self.v * o.d1, d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2 }
    }
}

/// A scalar profile `f(r)`, `r > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile1D {
    /// `ξ_n`: 0 on `(0, 1/n]`, `log(rn)/log n` on `[1/n, 1]`, 1 beyond.
    LogRamp { n: f64 },
    /// `ξ_n^2`, the ramp used for second-order problems.
    SquaredLogRamp { n: f64 },
    /// Quintic smoothstep from 1 (below `r0`) to 0 (above `r1`).
    SmoothCutoff { r0: f64, r1: f64 },
    /// `ξ_n^2` with a linear correction of its derivative so that the slope
    /// vanishes at both ends, normalised to reach 1 at `r = 1`.
    CorrectedRamp { n: f64 },
    /// `r^{-α}`.
    Power { alpha: f64 },
    /// `r^{-α} (1 + r)^{α - α'}`.
    Rellich { alpha: f64, alpha_prime: f64 },
    /// `f(r / scale)`.
    Scaled { inner: Box<Profile1D>, scale: f64 },
    /// Pointwise product.
    Product { factors: Vec<Profile1D> },
}

pub(crate) fn quintic(t: f64) -> Jet {
    // S(t) = 10t^3 - 15t^4 + 6t^5
    Jet {
        v: t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
        d1: 30.0 * t * t * (1.0 - t) * (1.0 - t),
        d2: 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
    }
}

impl Profile1D {
    pub fn log_ramp(n: f64) -> Result<Self> {
        check_n(n)?;
        Ok(Profile1D::LogRamp { n })
    }

    pub fn squared_log_ramp(n: f64) -> Result<Self> {
        check_n(n)?;
        Ok(Profile1D::SquaredLogRamp { n })
    }

    /// The standard cutoff on `[1, 2]`.
    pub fn smooth_cutoff() -> Self {
        Profile1D::SmoothCutoff { r0: 1.0, r1: 2.0 }
    }

    pub fn smooth_cutoff_on(r0: f64, r1: f64) -> Result<Self> {
        if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
            return Err(Error::InvalidParameter(format!("cutoff needs 0 < r0 < r1, got [{r0}, {r1}]")));
        }
        Ok(Profile1D::SmoothCutoff { r0, r1 })
    }

    pub fn corrected_ramp(n: f64) -> Result<Self> {
        check_n(n)?;
        Ok(Profile1D::CorrectedRamp { n })
    }

    pub fn rellich_profile(alpha: f64, alpha_prime: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha_prime >= 0.0) {
            return Err(Error::InvalidParameter("Rellich profile exponents must be nonnegative".into()));
        }
        Ok(Profile1D::Rellich { alpha, alpha_prime })
    }

    pub fn product(factors: Vec<Profile1D>) -> Self {
        Profile1D::Product { factors }
    }

    /// `χ_n = ξ_n ζ` with the cutoff on `[1, 2]`.
    pub fn chi_sequence(n: f64) -> Result<Self> {
        Ok(Self::product(vec![Self::log_ramp(n)?, Self::smooth_cutoff()]))
    }

    /// `σ_n = ρ_n ζ` with the cutoff on `[1, 2]`.
    pub fn sigma_sequence(n: f64) -> Result<Self> {
        Ok(Self::product(vec![Self::corrected_ramp(n)?, Self::smooth_cutoff()]))
    }

    /// Log ramp on `[1/n, 1]`, plateau on `[1, n]`, cutoff on `[n, κ n]`.
    pub fn chi_plateau(n: f64, kappa: f64) -> Result<Self> {
        Ok(Self::product(vec![Self::log_ramp(n)?, Self::smooth_cutoff_on(n, kappa * n)?]))
    }

    /// Corrected ramp on `[1/n, 1]`, plateau on `[1, n]`, cutoff on `[n, κ n]`.
    pub fn sigma_plateau(n: f64, kappa: f64) -> Result<Self> {
        Ok(Self::product(vec![Self::corrected_ramp(n)?, Self::smooth_cutoff_on(n, kappa * n)?]))
    }

    /// `f(r / scale)`.
    pub fn scaled(self, scale: f64) -> Self {
        Profile1D::Scaled { inner: Box::new(self), scale }
    }

    /// Value and the two derivatives at `r > 0`.
    pub fn jet(&self, r: f64) -> Jet {
        match self {
            Profile1D::LogRamp { n } => {
                let l = n.ln();
                if r <= 1.0 / n {
                    Jet::ZERO
                } else if r >= 1.0 {
                    Jet::ONE
                } else {
                    Jet { v: (r * n).ln() / l, d1: 1.0 / (r * l), d2: -1.0 / (r * r * l) }
                }
            }
            Profile1D::SquaredLogRamp { n } => {
                let l = n.ln();
                if r <= 1.0 / n {
                    Jet::ZERO
                } else if r >= 1.0 {
                    Jet::ONE
                } else {
                    let lr = (r * n).ln();
                    let u = lr / l;
                    Jet { v: u * u, d1: 2.0 * u / (r * l), d2: 2.0 * (1.0 - lr) / (r * r * l * l) }
                }
            }
            Profile1D::SmoothCutoff { r0, r1 } => {
                if r <= *r0 {
                    Jet::ONE
                } else if r >= *r1 {
                    Jet::ZERO
                } else {
                    let w = r1 - r0;
                    let s = quintic((r - r0) / w);
                    Jet { v: 1.0 - s.v, d1: -s.d1 / w, d2: -s.d2 / (w * w) }
                }
            }
            Profile1D::CorrectedRamp { n } => {
                let l = n.ln();
                let a = 1.0 / n;
                if r <= a {
                    Jet::ZERO
                } else if r >= 1.0 {
                    Jet::ONE
                } else {
                    let norm = 1.0 - (1.0 - a) / l;
                    let lr = (r * n).ln();
                    let u = lr / l;
                    let k = 1.0 / (l * (1.0 - a));
                    Jet {
                        v: (u * u - k * (r - a) * (r - a)) / norm,
                        d1: (2.0 * u / (r * l) - 2.0 * k * (r - a)) / norm,
                        d2: (2.0 * (1.0 - lr) / (r * r * l * l) - 2.0 * k) / norm,
                    }
                }
            }
            Profile1D::Power { alpha } => {
                let v = r.powf(-alpha);
                Jet { v, d1: -alpha * v / r, d2: alpha * (alpha + 1.0) * v / (r * r) }
            }
            Profile1D::Rellich { alpha, alpha_prime } => {
                let v = r.powf(-alpha) * (1.0 + r).powf(alpha - alpha_prime);
                // χ' = χ g with g = -(α + α' r) / (r (1 + r)).
                let q = r * (1.0 + r);
                let g = -(alpha + alpha_prime * r) / q;
                let dg = -(alpha_prime * q - (alpha + alpha_prime * r) * (1.0 + 2.0 * r)) / (q * q);
                Jet { v, d1: v * g, d2: v * (g * g + dg) }
            }
            Profile1D::Scaled { inner, scale } => {
                let j = inner.jet(r / scale);
                Jet { v: j.v, d1: j.d1 / scale, d2: j.d2 / (scale * scale) }
            }
            Profile1D::Product { factors } => {
                // A vanishing factor wins over a singular one (r^{-α} at small r).
                let jets: Vec<Jet> = factors.iter().map(|f| f.jet(r)).collect();
                if jets.contains(&Jet::ZERO) {
                    return Jet::ZERO;
                }
                jets.into_iter().fold(Jet::ONE, Jet::mul)
            }
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r).v
    }

    pub fn deriv1(&self, r: f64) -> f64 {
        self.jet(r).d1
    }

    pub fn deriv2(&self, r: f64) -> f64 {
        self.jet(r).d2
    }

    /// Closed support `[lo, hi]` (`hi` may be infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Profile1D::LogRamp { n } | Profile1D::SquaredLogRamp { n } | Profile1D::CorrectedRamp { n } => {
                (1.0 / n, f64::INFINITY)
            }
            Profile1D::SmoothCutoff { r1, .. } => (0.0, *r1),
            Profile1D::Power { .. } | Profile1D::Rellich { .. } => (0.0, f64::INFINITY),
            Profile1D::Scaled { inner, scale } => {
                let (a, b) = inner.support();
                (a * scale, b * scale)
            }
            Profile1D::Product { factors } => factors.iter().fold((0.0, f64::INFINITY), |(a, b), f| {
                let (c, d) = f.support();
                (a.max(c), b.min(d))
            }),
        }
    }

    /// Points where the piecewise definition changes.
    pub fn knots(&self) -> Vec<f64> {
        let mut k = match self {
            Profile1D::LogRamp { n } | Profile1D::SquaredLogRamp { n } | Profile1D::CorrectedRamp { n } => {
                vec![1.0 / n, 1.0]
            }
            Profile1D::SmoothCutoff { r0, r1 } => vec![*r0, *r1],
            Profile1D::Power { .. } | Profile1D::Rellich { .. } => vec![],
            Profile1D::Scaled { inner, scale } => inner.knots().into_iter().map(|x| x * scale).collect(),
            Profile1D::Product { factors } => factors.iter().flat_map(|f| f.knots()).collect(),
        };
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    pub fn smoothness(&self) -> Smoothness {
        match self {
            Profile1D::LogRamp { .. } => Smoothness::C0,
            // ξ_n^2 has slope 0 at 1/n but 2/log n at 1.
            Profile1D::SquaredLogRamp { .. } => Smoothness::C0,
            Profile1D::SmoothCutoff { .. } | Profile1D::Power { .. } | Profile1D::Rellich { .. } => Smoothness::C2,
            // Slopes match at both knots; curvature jumps.
            Profile1D::CorrectedRamp { .. } => Smoothness::C1,
            Profile1D::Scaled { inner, .. } => inner.smoothness(),
            Profile1D::Product { factors } => factors.iter().map(|f| f.smoothness()).min().unwrap_or(Smoothness::C2),
        }
    }

    /// True if the profile is bounded by 1 in absolute value (ramp and cutoff family).
    pub fn is_bounded_by_one(&self) -> bool {
        match self {
            Profile1D::Power { .. } | Profile1D::Rellich { .. } => false,
            Profile1D::Scaled { inner, .. } => inner.is_bounded_by_one(),
            Profile1D::Product { factors } => factors.iter().all(|f| f.is_bounded_by_one()),
            _ => true,
        }
    }
}

fn check_n(n: f64) -> Result<()> {
    if n > 1.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("sequence index n must exceed 1, got {n}")))
    }
}

/// `∫ r^γ |f^{(j)}(r)|^p dr` over the support of `f`.
///
/// The integral is split at the profile's knots and computed in the
/// logarithmic variable. If the support reaches 0 or infinity the local
/// power-law exponent of the integrand decides convergence there; a
/// non-integrable endpoint is reported as [`Error::Divergent`].
pub fn profile_integral(profile: &Profile1D, gamma: f64, j: usize, p: f64, opts: QuadOptions) -> Result<QuadResult> {
    if j > 2 {
        return Err(Error::InvalidParameter(format!("derivative order {j} not available")));
    }
    let f = |r: f64| -> f64 {
        let jet = profile.jet(r);
        let v = match j {
            0 => jet.v,
            1 => jet.d1,
            _ => jet.d2,
        };
        if v == 0.0 {
            0.0
        } else {
            r.powf(gamma) * v.abs().powf(p)
        }
    };
    radial_integral(&f, profile.support(), &profile.knots(), opts)
}

/// Integral of `f` over `support`, split at `knots`, with power-law tails.
pub(crate) fn radial_integral<F: Fn(f64) -> f64>(f: &F, support: (f64, f64), knots: &[f64], opts: QuadOptions) -> Result<QuadResult> {
    let (lo, hi) = support;
    let inner: Vec<f64> = knots.iter().copied().filter(|k| *k > lo && *k < hi && *k > 0.0).collect();
    let first = inner.first().copied().unwrap_or(if hi.is_finite() { hi } else { lo.max(1.0) * 2.0 });
    let last = inner.last().copied().unwrap_or(if lo > 0.0 { lo } else { first });
    const DEPTH: f64 = 1e-40;

    let mut total = QuadResult::zero();
    let a = if lo > 0.0 {
        lo
    } else {
        let r0 = first * DEPTH;
        let e = local_exponent(f, r0, 0.5);
        if e.is_finite() && e <= -1.0 + 1e-6 {
            return Err(Error::Divergent(format!("integrand ~ r^{e:.3} at 0")));
        }
        if e.is_finite() {
            let tail = f(r0) * r0 / (e + 1.0);
            total = total.add(QuadResult { value: tail, error: tail.abs(), evals: 2, converged: true });
        }
        r0
    };
    let b = if hi.is_finite() {
        hi
    } else {
        let r1 = last.max(a) / DEPTH;
        let e = local_exponent(f, r1, 2.0);
        if e.is_finite() && e >= -1.0 - 1e-6 {
            return Err(Error::Divergent(format!("integrand ~ r^{e:.3} at infinity")));
        }
        if e.is_finite() {
            let tail = -f(r1) * r1 / (e + 1.0);
            total = total.add(QuadResult { value: tail, error: tail.abs(), evals: 2, converged: true });
        }
        r1
    };
    if b <= a {
        return Ok(total);
    }
    let body = if a > 0.0 && b / a > 8.0 {
        integrate_log(f, a, b, &inner, opts)?
    } else {
        integrate(f, a, b, &inner, opts)?
    };
    Ok(total.add(body))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(p: &Profile1D, r: f64) {
        let h = 1e-6 * r;
        let j = p.jet(r);
        let d1 = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
        let d2 = (p.deriv1(r + h) - p.deriv1(r - h)) / (2.0 * h);
        assert!((d1 - j.d1).abs() <= 1e-6 * (1.0 + j.d1.abs()), "{p:?} d1 at {r}: {d1} vs {}", j.d1);
        assert!((d2 - j.d2).abs() <= 1e-6 * (1.0 + j.d2.abs()), "{p:?} d2 at {r}: {d2} vs {}", j.d2);
    }

    #[test]
    fn log_ramp_midpoint() {
        let p = Profile1D::log_ramp(std::f64::consts::E.powi(2)).unwrap();
        assert!((p.value((-1.0f64).exp()) - 0.5).abs() < 1e-15);
        assert!(Profile1D::log_ramp(1.0).is_err());
    }

    #[test]
    fn cutoff_examples() {
        let z = Profile1D::smooth_cutoff();
        assert_eq!(z.value(0.5), 1.0);
        assert_eq!(z.value(3.0), 0.0);
        let z = Profile1D::smooth_cutoff_on(2.0, 5.0).unwrap();
        assert!((z.value(3.5) - 0.5).abs() < 1e-15);
        assert!(Profile1D::smooth_cutoff_on(2.0, 2.0).is_err());
        for r in [2.0, 5.0] {
            let jump = (z.deriv2(r + 1e-9) - z.deriv2(r - 1e-9)).abs();
            assert!(jump <= 1e-7, "second derivative jump {jump}");
        }
    }

    #[test]
    fn corrected_ramp_endpoints_and_slopes() {
        for n in [3.0, 10.0, 1e3, 1e6] {
            let p = Profile1D::corrected_ramp(n).unwrap();
            assert_eq!(p.value(1.0 / n), 0.0);
            assert!((p.value(1.0) - 1.0).abs() < 1e-14);
            for k in [1.0 / n, 1.0] {
                let jump = (p.deriv1(k * (1.0 + 1e-14)) - p.deriv1(k * (1.0 - 1e-14))).abs();
                assert!(jump <= 1e-9, "slope jump {jump} at {k} for n={n}");
            }
            for i in 0..200 {
                let r = (1.0 / n) * n.powf(i as f64 / 199.0);
                let v = p.value(r);
                assert!((-1e-15..=1.0 + 1e-15).contains(&v));
            }
        }
    }

    #[test]
    fn squared_ramp_curvature() {
        let n = 1e4;
        let p = Profile1D::squared_log_ramp(n).unwrap();
        let l = n.ln();
        for r in [1e-3, 0.01, 0.5] {
            let expect = 2.0 * (1.0 - (r * n).ln()) / (r * r * l * l);
            assert!((p.deriv2(r) - expect).abs() <= 1e-12 * expect.abs());
        }
    }

    #[test]
    fn rellich_profile_examples() {
        let p = Profile1D::rellich_profile(1.5, 1.5).unwrap();
        assert!((p.value(2.0) - 2f64.powf(-1.5)).abs() < 1e-15);
        assert!((p.deriv1(2.0) + 1.5 * 2f64.powf(-2.5)).abs() < 1e-15);
        let p = Profile1D::rellich_profile(1.0, 2.0).unwrap();
        assert!((p.value(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_differences() {
        let profiles = vec![
            Profile1D::log_ramp(50.0).unwrap(),
            Profile1D::squared_log_ramp(50.0).unwrap(),
            Profile1D::corrected_ramp(50.0).unwrap(),
            Profile1D::smooth_cutoff_on(1.0, 3.0).unwrap(),
            Profile1D::Power { alpha: 0.7 },
            Profile1D::rellich_profile(0.5, 2.5).unwrap(),
            Profile1D::sigma_plateau(20.0, 4.0).unwrap().scaled(0.5),
        ];
        for p in &profiles {
            for r in [0.03, 0.07, 0.2, 0.6, 0.9, 1.7, 2.4, 6.0, 30.0] {
                if p.knots().iter().any(|k| (r / k - 1.0).abs() < 1e-3) {
                    continue;
                }
                fd_check(p, r);
            }
        }
    }

    #[test]
    fn support_and_smoothness() {
        let s = Profile1D::sigma_sequence(100.0).unwrap();
        assert_eq!(s.support(), (0.01, 2.0));
        assert_eq!(s.smoothness(), Smoothness::C1);
        assert_eq!(Profile1D::chi_sequence(100.0).unwrap().smoothness(), Smoothness::C0);
        assert_eq!(s.knots(), vec![0.01, 1.0, 2.0]);
    }

    #[test]
    fn integral_of_ramp_derivative() {
        for p in [1.5, 2.0, 3.0] {
            let n: f64 = 1e4;
            let r = profile_integral(&Profile1D::chi_sequence(n).unwrap().scaled(1.0), p - 1.0, 1, p, QuadOptions::rel(1e-12));
            let r = r.unwrap();
            assert!(r.value > n.ln().powf(1.0 - p));
        }
    }

    #[test]
    fn divergence_is_flagged() {
        let z = Profile1D::smooth_cutoff();
        assert!(matches!(profile_integral(&z, -1.0, 0, 2.0, QuadOptions::default()), Err(Error::Divergent(_))));
        let r = profile_integral(&z, -0.5, 0, 2.0, QuadOptions::default()).unwrap();
        assert!(r.value > 2.0 && r.value < 2.0 * 2f64.sqrt());
        let pw = Profile1D::Power { alpha: 1.0 };
        assert!(matches!(profile_integral(&pw, 0.0, 0, 1.0, QuadOptions::default()), Err(Error::Divergent(_))));
    }
}
