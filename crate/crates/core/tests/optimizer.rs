mod common;

use common::*;
use hardy_rellich::constants::ProblemSpec;
use hardy_rellich::functionals::QuadratureSpec;
use hardy_rellich::optimizer::*;
use hardy_rellich::weights::WeightParams;
use hardy_rellich::Error;

fn point_spec(d: usize, w: WeightParams) -> ProblemSpec {
    ProblemSpec::new(point(d), 2.0, w).unwrap()
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::radial(1e-8)
}

#[test]
fn hardy_sweep_extrapolates_to_a_quarter() {
    let s = point_spec(3, WeightParams::power(0.0));
    let fam = TrialFamily::hardy_extremal(&s, Regime::Local);
    let r = sequence_sweep(&s, Functional::Hardy, &fam, &default_n_list(), &quad()).unwrap();
    assert!((0.24..=0.27).contains(&r.fit.q_inf), "{:?}", r.fit);
    assert!(r.monotone);
    assert!(r.min_margin().unwrap() >= 0.0);
    assert!(!r.fit.heuristic);
}

#[test]
fn rellich_sweep_extrapolates_near_the_constant() {
    let s = point_spec(5, WeightParams::power(0.0));
    let fam = TrialFamily::rellich_extremal(&s, Regime::Local);
    let r = sequence_sweep(&s, Functional::Rellich, &fam, &default_n_list(), &quad()).unwrap();
    assert!((1.50..=1.70).contains(&r.fit.q_inf), "{:?}", r.fit);
    assert!(r.monotone && r.fit.heuristic);
    assert!(r.quotients.iter().all(|q| *q >= 1.5625));
}

#[test]
fn growth_regime_for_mixed_exponents() {
    // δ > δ': the smaller exponent governs at infinity.
    let s = point_spec(3, WeightParams::new(1.0, 0.5));
    assert_eq!(Regime::for_spec(&s), Regime::Growth);
    let fam = TrialFamily::hardy_extremal(&s, Regime::Growth);
    let r = sequence_sweep(&s, Functional::Hardy, &fam, &[1e2, 1e6, 1e12, 1e20], &quad()).unwrap();
    let target = 0.75f64.powi(2);
    assert!(r.min_margin().unwrap() >= -1e-9);
    assert!((r.fit.q_inf / target - 1.0).abs() < 0.05, "{:?}", r.fit);
}

#[test]
fn sweep_needs_three_points() {
    let s = point_spec(3, WeightParams::power(0.0));
    let e = sequence_sweep(&s, Functional::Hardy, &TrialFamily::Sigma, &[10.0, 100.0], &quad()).unwrap_err();
    assert_eq!(e, Error::TooFewPoints { needed: 3, got: 2 });
}

#[test]
fn alpha_search_approaches_a_quarter() {
    let s = point_spec(3, WeightParams::power(0.0));
    let narrow = minimize_alpha(&s, 0.1, 0.49, &AlphaSearch::default(), &QuadratureSpec::radial(1e-7)).unwrap();
    let wide = AlphaSearch { ramp_n: 1e30, cutoff_outer: 1e6, ..AlphaSearch::default() };
    let m = minimize_alpha(&s, 0.1, 0.4999, &wide, &QuadratureSpec::radial(1e-7)).unwrap();
    assert!(m.quotient < narrow.quotient);
    assert!(m.quotient >= 0.25 && m.quotient <= 0.275, "{m:?}");
    assert!(m.agree, "{m:?}");
    assert_eq!(m.starts.len(), 3);
}

#[test]
fn alpha_search_follows_the_integrability_limit() {
    let s = point_spec(3, WeightParams::power(2.0));
    let m = minimize_alpha(&s, 0.5, 1.49, &AlphaSearch::default(), &QuadratureSpec::radial(1e-7)).unwrap();
    assert!(m.alpha > 1.4, "{m:?}");
    assert!(matches!(minimize_alpha(&s, 0.5, 1.5, &AlphaSearch::default(), &quad()), Err(Error::Divergent(_))));
    let same = minimize_alpha(&s, 0.8, 0.8, &AlphaSearch::default(), &quad()).unwrap();
    assert_eq!(same.alpha, 0.8);
}

#[test]
fn point_bracket_collapses() {
    let s = point_spec(3, WeightParams::power(0.0));
    let b = bracket_mu(&s, &BracketOptions::default()).unwrap();
    assert_eq!(b.lower, Some(0.25));
    assert!(b.status.is_exact());
    assert!(b.numerical_upper.unwrap() <= 0.27, "{b:?}");
    assert!(b.consistent(1e-9));
    assert!(b.tags.iter().any(|t| t == "PointBody"));
}

#[test]
fn line_bracket_collapses() {
    let s = ProblemSpec::new(line(4), 2.0, WeightParams::new(0.0, 1.0)).unwrap();
    let b = bracket_mu(&s, &BracketOptions::default()).unwrap();
    assert_eq!(b.lower, Some(0.25));
    let up = b.numerical_upper.unwrap();
    assert!((0.25..=0.275).contains(&up), "{b:?}");
}

#[test]
fn invalid_spec_gives_empty_bracket() {
    let s = point_spec(2, WeightParams::power(0.0));
    let b = bracket_mu(&s, &BracketOptions::default()).unwrap();
    assert!(b.lower.is_none() && b.upper.is_none());
    assert!(b.diagnosis.unwrap().contains("condition"));
    let r = bracket_nu(&point_spec(3, WeightParams::power(0.0)), &BracketOptions::default()).unwrap();
    assert!(r.lower.is_none() && r.diagnosis.is_some());
}

#[test]
fn rellich_bracket_on_a_point() {
    let s = point_spec(5, WeightParams::power(0.0));
    let b = bracket_nu(&s, &BracketOptions::default()).unwrap();
    assert!((b.lower.unwrap() - 1.5625).abs() < 1e-12);
    assert!(b.numerical_upper.unwrap() <= 1.5625 * 1.1, "{b:?}");
}

#[test]
fn csv_export_is_byte_stable() {
    let s = point_spec(3, WeightParams::power(0.0));
    let fam = TrialFamily::hardy_extremal(&s, Regime::Local);
    let a = sweep_csv(&s, &sequence_sweep(&s, Functional::Hardy, &fam, &default_n_list(), &quad()).unwrap()).unwrap();
    let b = sweep_csv(&s, &sequence_sweep(&s, Functional::Hardy, &fam, &default_n_list(), &quad()).unwrap()).unwrap();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next().unwrap(), "spec_hash,trial_id,n,quotient,error,lower_bound,margin");
    assert_eq!(lines.count(), 4);
    let other = point_spec(4, WeightParams::power(0.0));
    assert_ne!(spec_hash(&s), spec_hash(&other));
}

#[test]
fn family_json_round_trip() {
    let s = point_spec(3, WeightParams::power(0.0));
    for f in [TrialFamily::Chi, TrialFamily::Sigma, TrialFamily::hardy_extremal(&s, Regime::Growth), TrialFamily::rellich_extremal(&s, Regime::Local)] {
        let j = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<TrialFamily>(&j).unwrap(), f);
    }
}
