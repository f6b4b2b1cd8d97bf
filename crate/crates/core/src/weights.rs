//! The weight `c(s) = s^δ (a + b s)^{δ'-δ}`.
//!
//! `δ` controls behaviour at the boundary (`c(s) ~ a^{δ'-δ} s^δ` as `s -> 0`)
//! and `δ'` behaviour at infinity (`c(s) ~ b^{δ'-δ} s^{δ'}`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightParams {
    pub delta: f64,
    pub delta_prime: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for WeightParams {
    fn default() -> Self {
        Self::power(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Zero,
    Infinity,
}

impl WeightParams {
    pub fn new(delta: f64, delta_prime: f64) -> Self {
        Self { delta, delta_prime, a: 1.0, b: 1.0 }
    }

    /// `c(s) = s^δ`.
    pub fn power(delta: f64) -> Self {
        Self::new(delta, delta)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.delta) || !ok(self.delta_prime) {
            return Err(Error::InvalidParameter(format!(
                "weight exponents must be finite and nonnegative (delta={}, delta_prime={})",
                self.delta, self.delta_prime
            )));
        }
        if !(self.a > 0.0 && self.a.is_finite() && self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParameter("weight coefficients a, b must be positive".into()));
        }
        Ok(())
    }

    pub fn min_exponent(&self) -> f64 {
        self.delta.min(self.delta_prime)
    }

    pub fn max_exponent(&self) -> f64 {
        self.delta.max(self.delta_prime)
    }

    pub fn is_pure_power(&self) -> bool {
        self.delta == self.delta_prime
    }

    fn positive(s: f64) -> Result<()> {
        if s > 0.0 && s.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("weight argument must be positive, got {s}")))
        }
    }

    /// `c(s)` for `s > 0`.
    pub fn value(&self, s: f64) -> Result<f64> {
        Self::positive(s)?;
        Ok(self.value_unchecked(s))
    }

    /// `c(s)` for `s >= 0`; at `s = 0` returns 0 if `δ > 0`, else `a^{δ'-δ}`.
    pub fn value_at(&self, s: f64) -> f64 {
        if s == 0.0 {
            if self.delta > 0.0 {
                0.0
            } else {
                self.a.powf(self.delta_prime - self.delta)
            }
        } else {
            self.value_unchecked(s)
        }
    }

    #[inline]
    pub(crate) fn value_unchecked(&self, s: f64) -> f64 {
        if self.delta == self.delta_prime {
            return s.powf(self.delta);
        }
        s.powf(self.delta) * (self.a + self.b * s).powf(self.delta_prime - self.delta)
    }

    /// `s c'(s) / c(s) = (a δ + b δ' s) / (a + b s)`.
    pub fn log_derivative(&self, s: f64) -> Result<f64> {
        Self::positive(s)?;
        Ok(self.log_derivative_unchecked(s))
    }

    #[inline]
    pub(crate) fn log_derivative_unchecked(&self, s: f64) -> f64 {
        if self.delta == self.delta_prime {
            return self.delta;
        }
        (self.a * self.delta + self.b * self.delta_prime * s) / (self.a + self.b * s)
    }

    pub fn derivative(&self, s: f64) -> Result<f64> {
        Self::positive(s)?;
        Ok(self.derivative_unchecked(s))
    }

    #[inline]
    pub(crate) fn derivative_unchecked(&self, s: f64) -> f64 {
        self.value_unchecked(s) * self.log_derivative_unchecked(s) / s
    }

    /// Ratios `c(s)/s^δ` on `s = 10^{-1}, ..., 10^{-12}` (towards zero) or
    /// `c(s)/s^{δ'}` on `s = 10, ..., 10^{12}` (towards infinity), paired
    /// with their limit `a^{δ'-δ}` resp. `b^{δ'-δ}`.
    pub fn asymptotics(&self, direction: Direction) -> Result<(Vec<(f64, f64)>, f64)> {
        self.validate()?;
        let e = self.delta_prime - self.delta;
        let ratios = (1..=12)
            .map(|i| {
                let s = match direction {
                    Direction::Zero => 10f64.powi(-i),
                    Direction::Infinity => 10f64.powi(i),
                };
                let denom = match direction {
                    Direction::Zero => s.powf(self.delta),
                    Direction::Infinity => s.powf(self.delta_prime),
                };
                (s, self.value_unchecked(s) / denom)
            })
            .collect();
        let limit = match direction {
            Direction::Zero => self.a.powf(e),
            Direction::Infinity => self.b.powf(e),
        };
        Ok((ratios, limit))
    }
}

pub fn weight_value(w: &WeightParams, s: f64) -> Result<f64> {
    w.value(s)
}

pub fn weight_derivative(w: &WeightParams, s: f64) -> Result<f64> {
    w.derivative(s)
}

pub fn weight_log_derivative(w: &WeightParams, s: f64) -> Result<f64> {
    w.log_derivative(s)
}

pub fn weight_asymptotics_check(w: &WeightParams, direction: Direction) -> Result<(Vec<(f64, f64)>, f64)> {
    w.asymptotics(direction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_exponents_give_pure_power() {
        let w = WeightParams::power(0.7);
        for s in [1e-3, 0.5, 1.0, 7.0, 1e4] {
            assert!((w.value(s).unwrap() / s.powf(0.7) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn one_step_substitution() {
        let w = WeightParams::new(1.0, 3.0);
        assert_eq!(w.value(1.0).unwrap(), 4.0);
        assert_eq!(w.log_derivative(1.0).unwrap(), 2.0);
    }

    #[test]
    fn boundary_values() {
        assert_eq!(WeightParams::new(0.5, 1.0).value_at(0.0), 0.0);
        let w = WeightParams { delta: 0.0, delta_prime: 1.0, a: 2.0, b: 1.0 };
        assert_eq!(w.value_at(0.0), 2.0);
        assert!(w.value(0.0).is_err());
        assert!(w.value(-1.0).is_err());
    }

    #[test]
    fn asymptotic_limits() {
        let (r, lim) = WeightParams::new(0.0, 2.0).asymptotics(Direction::Infinity).unwrap();
        assert_eq!(lim, 1.0);
        assert!((r.last().unwrap().1 - lim).abs() < 1e-3);
        let w = WeightParams { delta: 0.0, delta_prime: 1.0, a: 2.0, b: 1.0 };
        let (r, lim) = w.asymptotics(Direction::Zero).unwrap();
        assert_eq!(lim, 2.0);
        assert!((r.last().unwrap().1 - 2.0).abs() < 1e-3);
        let (r, _) = WeightParams::power(1.3).asymptotics(Direction::Zero).unwrap();
        assert!(r.iter().all(|(_, q)| (q - 1.0).abs() < 1e-14));
    }

    #[test]
    fn json_defaults_and_strictness() {
        let w: WeightParams = serde_json::from_str(r#"{"delta":1,"delta_prime":0.5}"#).unwrap();
        assert_eq!((w.a, w.b), (1.0, 1.0));
        assert!(serde_json::from_str::<WeightParams>(r#"{"delta":1,"delta_prime":0.5,"c":1}"#).is_err());
    }

    fn weight() -> impl Strategy<Value = WeightParams> {
        (0.0..4.0f64, 0.0..4.0f64, 0.1..5.0f64, 0.1..5.0f64)
            .prop_map(|(delta, delta_prime, a, b)| WeightParams { delta, delta_prime, a, b })
    }

    proptest! {
        #[test]
        fn log_derivative_lies_between_exponents(w in weight(), e in -6.0..6.0f64) {
            let s = 10f64.powf(e);
            let l = w.log_derivative(s).unwrap();
            prop_assert!(l >= w.min_exponent() - 1e-12 && l <= w.max_exponent() + 1e-12);
            prop_assert!(w.value(s).unwrap() > 0.0);
        }

        #[test]
        fn derivative_matches_central_difference(w in weight(), s in 0.05..20.0f64) {
            let h = 1e-5 * s;
            let fd = (w.value(s + h).unwrap() - w.value(s - h).unwrap()) / (2.0 * h);
            let an = w.derivative(s).unwrap();
            prop_assert!((fd - an).abs() <= 1e-8 * (1.0 + an.abs()));
        }

        #[test]
        fn role_swap_with_inversion(w in weight(), e in -5.0..5.0f64) {
            let s = 10f64.powf(e);
            let swapped = WeightParams { delta: w.delta_prime, delta_prime: w.delta, a: w.b, b: w.a };
            let l1 = swapped.log_derivative(s).unwrap();
            let l2 = w.log_derivative(1.0 / s).unwrap();
            prop_assert!((l1 - l2).abs() <= 1e-12 * (1.0 + l1.abs()));
        }
    }
}
