//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Intervals live in a max-heap keyed by their error estimate; the worst one
//! is bisected until the summed error meets the tolerance or the evaluation
//! budget runs out. Callers split at known kinks up front (`knots`) so each
//! panel sees a smooth integrand. Radial integrals over many decades are
//! handled in the logarithmic variable.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::linalg::compensated_sum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 0.0, max_evals: 2_000_000 }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn zero() -> Self {
        Self { value: 0.0, error: 0.0, evals: 0, converged: true }
    }

    pub fn add(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }

    pub fn scaled(self, s: f64) -> QuadResult {
        QuadResult { value: self.value * s, error: self.error * s.abs(), ..self }
    }
}

/// One 15-point Kronrod panel: `(integral, error estimate)` with the
/// QUADPACK error heuristic.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut f1 = [0.0; 7];
    let mut f2 = [0.0; 7];
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kron.abs();
    for j in 0..7 {
        let x = h * XGK[j];
        f1[j] = f(c - x);
        f2[j] = f(c + x);
        let s = f1[j] + f2[j];
        kron += WGK[j] * s;
        resabs += WGK[j] * (f1[j].abs() + f2[j].abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let mean = 0.5 * kron;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((f1[j] - mean).abs() + (f2[j] - mean).abs());
    }
    let h = h.abs();
    resasc *= h;
    resabs *= h;
    let mut err = ((kron - gauss) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (kron * h * (b - a).signum(), err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integral of `f` over `[a, b]`, pre-split at `knots` inside the range.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, knots: &[f64], opts: QuadOptions) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("finite limits required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult::zero());
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = vec![lo];
    let mut inner: Vec<f64> = knots.iter().copied().filter(|k| *k > lo && *k < hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(hi);

    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in cuts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evals += 15;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    let totals = |heap: &BinaryHeap<Panel>| -> (f64, f64) {
        (compensated_sum(heap.iter().map(|p| p.value)), heap.iter().map(|p| p.error).sum())
    };
    let (mut val, mut err) = totals(&heap);
    let mut converged = false;
    let mut iter = 0usize;
    loop {
        iter += 1;
        if iter.is_multiple_of(256) {
            // Running sums drift; refresh them exactly now and then.
            (val, err) = totals(&heap);
        }
        if !val.is_finite() || !err.is_finite() {
            return Err(Error::QuadratureFailure(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * val.abs()) {
            (val, err) = totals(&heap);
            if err <= opts.abs_tol.max(opts.rel_tol * val.abs()) {
                converged = true;
                break;
            }
        }
        if evals + 30 > opts.max_evals {
            break;
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || worst.error == 0.0 {
            // Interval exhausted at machine precision; keep its estimate.
            if worst.error == 0.0 {
                heap.push(worst);
                break;
            }
            err -= worst.error;
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evals += 30;
        val += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    let (value, error) = totals(&heap);
    Ok(QuadResult { value: sign * value, error, evals, converged })
}

/// `∫_a^b f(r) dr` for `0 < a < b`, computed as `∫ f(e^u) e^u du`.
pub fn integrate_log<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, knots: &[f64], opts: QuadOptions) -> Result<QuadResult> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("log-variable quadrature needs 0 < a < b < inf, got [{a}, {b}]")));
    }
    let lk: Vec<f64> = knots.iter().filter(|k| **k > a && **k < b).map(|k| k.ln()).collect();
    integrate(
        |u| {
            let r = u.exp();
            f(r) * r
        },
        a.ln(),
        b.ln(),
        &lk,
        opts,
    )
}

/// `∫_a^∞ f(r) dr` via `r = a + t/(1-t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        },
        0.0,
        1.0,
        &[],
        opts,
    )
}

/// Local power-law exponent of `f` at `r` estimated from `f(r)` and `f(r q)`.
pub fn local_exponent<F: Fn(f64) -> f64>(f: &F, r: f64, q: f64) -> f64 {
    let a = f(r).abs();
    let b = f(r * q).abs();
    if a == 0.0 && b == 0.0 {
        return f64::INFINITY;
    }
    (b / a).ln() / q.ln()
}
