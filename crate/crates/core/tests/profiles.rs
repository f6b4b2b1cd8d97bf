mod common;

use common::*;
use hardy_rellich::profiles::*;
use hardy_rellich::quadrature::{integrate, QuadOptions};
use hardy_rellich::sampling::stream_rng;
use hardy_rellich::Error;
use proptest::prelude::*;
use rand::Rng;

const NS: [f64; 3] = [10.0, 1e2, 1e4];
const PS: [f64; 3] = [1.5, 2.0, 3.0];

fn opts() -> QuadOptions {
    QuadOptions::rel(1e-11)
}

#[test]
fn ramp_midpoint_in_log_scale() {
    let r = Profile1D::log_ramp(std::f64::consts::E.powi(2)).unwrap();
    assert!((r.value((-1f64).exp()) - 0.5).abs() < 1e-15);
}

#[test]
fn ramp_energy_is_a_power_of_log_n() {
    for n in NS {
        for p in PS {
            let q = profile_integral(&Profile1D::log_ramp(n).unwrap(), p - 1.0, 1, p, opts()).unwrap();
            let want = n.ln().powf(1.0 - p);
            assert!((q.value / want - 1.0).abs() < 1e-8, "n={n} p={p}: {} vs {want}", q.value);
        }
    }
}

#[test]
fn ramp_mass_on_the_rising_part() {
    for n in NS {
        for p in PS {
            let xi = Profile1D::log_ramp(n).unwrap();
            let q = integrate(|r: f64| xi.value(r).powf(p) / r, 1.0 / n, 1.0, &[], opts()).unwrap();
            let want = n.ln() / (p + 1.0);
            assert!((q.value / want - 1.0).abs() < 1e-8, "n={n} p={p}");
        }
    }
}

#[test]
fn squared_ramp_second_derivative() {
    for n in NS {
        let l = n.ln();
        let xi = Profile1D::squared_log_ramp(n).unwrap();
        for r in [1.5 / n, 0.01f64.max(2.0 / n), 0.5, 0.9] {
            let want = 2.0 * (1.0 - (r * n).ln()) / (r * r * l * l);
            assert!((xi.deriv2(r) - want).abs() <= 1e-10 * want.abs().max(1.0), "n={n} r={r}");
        }
        for p in PS {
            let q = profile_integral(&xi, 2.0 * p - 1.0, 2, p, opts()).unwrap();
            let want = 2f64.powf(p) * l.powf(-2.0 * p) * (1.0 + (l - 1.0).powf(p + 1.0)) / (p + 1.0);
            assert!((q.value / want - 1.0).abs() < 1e-8, "n={n} p={p}: {} vs {want}", q.value);
            assert!(q.value <= 2f64.powf(p - 1.0) * l.powf(1.0 - p));
        }
    }
}

#[test]
fn cutoff_examples() {
    let z = Profile1D::smooth_cutoff();
    assert_eq!(z.value(0.5), 1.0);
    assert_eq!(z.value(3.0), 0.0);
    let z = Profile1D::smooth_cutoff_on(2.0, 5.0).unwrap();
    assert!((z.value(3.5) - 0.5).abs() < 1e-15);
    for knot in [2.0, 5.0] {
        let jump = (z.deriv2(knot * (1.0 + 1e-12)) - z.deriv2(knot * (1.0 - 1e-12))).abs();
        assert!(jump <= 1e-10, "jump {jump} at {knot}");
    }
    assert!(Profile1D::smooth_cutoff_on(2.0, 2.0).is_err());
}

#[test]
fn cutoff_energy_regression() {
    // With r = 1 + t the integrand is 900 (1 + t) t^4 (1 - t)^4, whose
    // integral is 900 (B(5,5) + B(6,5)) = 15/7.
    let a = profile_integral(&Profile1D::smooth_cutoff(), 1.0, 1, 2.0, opts()).unwrap();
    assert!((a.value - 15.0 / 7.0).abs() < 1e-10, "{}", a.value);
}

#[test]
fn rellich_profile_examples() {
    let chi = Profile1D::rellich_profile(1.5, 1.5).unwrap();
    for s in [0.01, 1.0, 7.0] {
        assert!((chi.value(s) - s.powf(-1.5)).abs() <= 1e-14 * chi.value(s));
        assert!((chi.deriv1(s) + 1.5 * s.powf(-2.5)).abs() <= 1e-13 * chi.deriv1(s).abs());
    }
    assert!((Profile1D::rellich_profile(1.0, 2.0).unwrap().value(1.0) - 0.5).abs() < 1e-15);
}

#[test]
fn rellich_profile_derivative_brackets() {
    let mut rng = stream_rng(5, 0);
    for _ in 0..50 {
        let (a, b): (f64, f64) = (rng.random_range(0.0..4.0), rng.random_range(0.0..4.0));
        let chi = Profile1D::rellich_profile(a, b).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        for i in 0..=80 {
            let s = 10f64.powf(-4.0 + 0.1 * i as f64);
            let j = chi.jet(s);
            let tol = 1e-12 * j.v / s;
            assert!(j.d1 >= -hi * j.v / s - tol && j.d1 <= -lo * j.v / s + tol, "a={a} b={b} s={s}");
            assert!(j.d2 <= hi * (hi + 1.0) * j.v / (s * s) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn sigma_endpoints_and_smoothness() {
    for n in [10.0, 1e3, 1e6] {
        let s = Profile1D::sigma_sequence(n).unwrap();
        assert_eq!(s.value(1.0 / n), 0.0);
        assert!((s.value(1.0) - 1.0).abs() < 1e-12);
        assert!(s.is_bounded_by_one());
        for knot in [1.0 / n, 1.0] {
            let jump = (s.deriv1(knot * (1.0 + 1e-13)) - s.deriv1(knot * (1.0 - 1e-13))).abs();
            assert!(jump <= 1e-9 * (1.0 + s.deriv1(knot * 1.5).abs()), "n={n} knot={knot} jump={jump}");
        }
        let chi = Profile1D::chi_sequence(n).unwrap();
        let jump = (chi.deriv1(1.0 / n * (1.0 + 1e-12)) - chi.deriv1(1.0 / n * (1.0 - 1e-12))).abs();
        assert!(jump > 1.0, "chi derivative should jump at 1/n");
        let grid: Vec<f64> = (1..400).map(|i| i as f64 * 0.005).collect();
        assert!(grid.iter().all(|&r| (0.0..=1.0 + 1e-12).contains(&s.value(r))));
    }
}

#[test]
fn chi_increases_to_the_cutoff() {
    let z = Profile1D::smooth_cutoff();
    let grid: Vec<f64> = (1..300).map(|i| 10f64.powf(-6.0 + 0.02 * i as f64)).collect();
    let mut prev: Option<Profile1D> = None;
    for n in [10.0, 1e2, 1e3, 1e5, 1e8] {
        let chi = Profile1D::chi_sequence(n).unwrap();
        for &r in &grid {
            assert!(chi.value(r) <= z.value(r) + 1e-15);
            if let Some(p) = &prev {
                assert!(chi.value(r) >= p.value(r) - 1e-15);
            }
        }
        prev = Some(chi);
    }
}

#[test]
fn chi_mass_bound_and_growth() {
    let mut last = 0.0;
    for n in [10.0, 1e3, 1e6, 1e12] {
        let chi = Profile1D::chi_sequence(n).unwrap();
        for p in PS {
            let m = profile_integral(&chi, p - 1.0, 0, p, opts()).unwrap();
            assert!(m.value <= 2f64.powf(p) / p);
        }
        let g = profile_integral(&chi, -1.0, 0, 2.0, opts()).unwrap().value;
        assert!(g > last);
        last = g;
    }
    assert!(last > 8.0, "log-divergent mass only reached {last}");
}

#[test]
fn divergent_integrals_are_flagged() {
    let e = profile_integral(&Profile1D::Power { alpha: 1.0 }, 0.0, 0, 1.0, opts()).unwrap_err();
    assert!(matches!(e, Error::Divergent(_)), "{e:?}");
    assert!(profile_integral(&Profile1D::log_ramp(10.0).unwrap(), -1.0, 0, 2.0, opts()).is_err());
}

#[test]
fn sequences_reject_small_n() {
    assert!(Profile1D::log_ramp(1.0).is_err());
    assert!(Profile1D::sigma_sequence(0.5).is_err());
    assert!(Profile1D::chi_sequence(f64::NAN).is_err());
}

fn profiles() -> Vec<Profile1D> {
    vec![
        Profile1D::log_ramp(50.0).unwrap(),
        Profile1D::squared_log_ramp(50.0).unwrap(),
        Profile1D::smooth_cutoff(),
        Profile1D::corrected_ramp(50.0).unwrap(),
        Profile1D::chi_sequence(50.0).unwrap(),
        Profile1D::sigma_sequence(50.0).unwrap(),
        Profile1D::chi_plateau(50.0, 10.0).unwrap(),
        Profile1D::sigma_plateau(50.0, 10.0).unwrap(),
        Profile1D::rellich_profile(0.7, 2.1).unwrap(),
        Profile1D::sigma_sequence(50.0).unwrap().scaled(3.0),
    ]
}

#[test]
fn profile_json_round_trip() {
    for p in profiles() {
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Profile1D>(&s).unwrap(), p);
    }
}

#[test]
fn trials_reject_bad_supports() {
    let t = TrialFunction::radial(Profile1D::smooth_cutoff());
    assert!(matches!(t.bind(&point(3)), Err(Error::SupportViolation(_))));
    let t = TrialFunction::radial(Profile1D::chi_sequence(10.0).unwrap());
    assert!(matches!(t.bind(&line(3)), Err(Error::SupportViolation(_))));
    let env = Envelope::new(vec![0.0], 0.5, 2.0).unwrap();
    let t = TrialFunction::product(env, Profile1D::chi_sequence(10.0).unwrap());
    assert!(matches!(t.bind(&segment(3)), Err(Error::SupportViolation(_))));
    assert!(t.bind(&line(3)).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivatives_match_central_differences(i in 0usize..10, u in 0.0f64..1.0) {
        let p = &profiles()[i];
        let (lo, hi) = p.support();
        let (lo, hi) = (lo.max(1e-3), if hi.is_finite() { hi } else { 50.0 });
        let r = lo * (hi / lo).powf(u);
        let knots = p.knots();
        prop_assume!(knots.iter().all(|k| (r - k).abs() > 1e-4 * r));
        let h = 1e-5 * r;
        let fd1 = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
        let fd2 = (p.deriv1(r + h) - p.deriv1(r - h)) / (2.0 * h);
        let j = p.jet(r);
        prop_assert!((fd1 - j.d1).abs() <= 1e-6 * (1.0 + j.d1.abs()), "d1 {} vs {}", fd1, j.d1);
        prop_assert!((fd2 - j.d2).abs() <= 1e-6 * (1.0 + j.d2.abs()), "d2 {} vs {}", fd2, j.d2);
    }

    #[test]
    fn trial_gradients_match_differences(which in 0usize..3, seed in 0u64..1000) {
        let mut rng = stream_rng(seed, 1);
        let (body, trial) = match which {
            0 => (ball(3), TrialFunction::radial(Profile1D::sigma_sequence(20.0).unwrap())),
            1 => (point(4), TrialFunction::power_localized(0.6, Profile1D::chi_plateau(5.0, 3.0).unwrap())),
            _ => (line(3), TrialFunction::product(Envelope::new(vec![0.3], 1.0, 3.0).unwrap(), Profile1D::sigma_sequence(8.0).unwrap())),
        };
        let b = trial.bind(&body).unwrap();
        let x = outside(&mut rng, &body, 0.3);
        let tp = b.eval(&x).unwrap();
        for i in 0..x.len() {
            let h = 1e-6;
            let mut a = x.clone();
            let mut c = x.clone();
            a[i] += h;
            c[i] -= h;
            let fd = (b.value(&a).unwrap() - b.value(&c).unwrap()) / (2.0 * h);
            prop_assert!((fd - tp.gradient[i]).abs() <= 1e-6 * (1.0 + tp.gradient[i].abs()), "axis {} {} vs {}", i, fd, tp.gradient[i]);
        }
    }
}
