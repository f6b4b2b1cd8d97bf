//! One function per subcommand. Each returns the JSON document, the CSV
//! table and any findings that decide the exit code.

use hardy_rellich::constants::{constants_report, hardy_constant, rellich_constants, OptimalStatus, ProblemSpec};
use hardy_rellich::functionals::{hardy_quotient, rellich_quotient};
use hardy_rellich::geometry::check_suite;
use hardy_rellich::optimizer::{
    bracket_mu, bracket_nu, deep_n_list, default_n_list, sequence_sweep, spec_hash, sweep_csv, BracketOptions, Functional, Regime, TrialFamily,
};
use hardy_rellich::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::CliError;

/// Factor applied to the lower bound by `--expect-fail`.
pub const CORRUPTION: f64 = 1e3;

#[derive(Debug, Default)]
pub struct Report {
    pub results: Vec<Value>,
    pub csv: String,
    pub violations: Vec<String>,
    pub preconditions: Vec<String>,
}

impl Report {
    pub fn json(&self, command: &str) -> Value {
        json!({ "schema_version": SCHEMA_VERSION, "command": command, "results": self.results })
    }
}

fn failed(e: Error) -> CliError {
    match e {
        Error::ExponentDomain(_) | Error::InvalidParameter(_) | Error::InvalidBody(_) | Error::DimensionMismatch { .. } | Error::EmptyBody => {
            CliError::Config(e.to_string())
        }
        e => CliError::Config(format!("computation failed: {e}")),
    }
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(header).expect("in-memory write");
        Self { w }
    }

    fn row(&mut self, fields: &[String]) {
        self.w.write_record(fields).expect("in-memory write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn snake<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn status_cells(s: &OptimalStatus) -> [String; 4] {
    let kind = match s {
        OptimalStatus::Exact { .. } => "exact",
        OptimalStatus::Bracket { .. } => "bracket",
        OptimalStatus::Unknown { .. } => "unknown",
    };
    [kind.into(), opt(s.lower()), opt(s.upper()), snake(&s.reason())]
}

pub fn constants(configs: &[ExperimentConfig]) -> Result<Report, CliError> {
    let mut out = Report::default();
    let mut t = Table::new(&[
        "spec_hash", "d", "d_h", "k", "k_inf", "p", "delta", "delta_prime", "hardy_a_p", "hardy_a_p_pow", "hardy_valid", "hardy_convex",
        "rellich_c_p", "rellich_C_p", "rellich_valid", "mu_status", "mu_lower", "mu_upper", "mu_reason", "nu_status", "nu_lower", "nu_upper",
        "nu_reason",
    ]);
    for c in configs {
        let r = constants_report(&c.spec);
        if c.functional == Some(Functional::Rellich) {
            if let Some(e) = &r.rellich_error {
                return Err(CliError::Config(e.clone()));
            }
        }
        let hash = spec_hash(&c.spec);
        let mut row = vec![
            hash.clone(),
            r.d.to_string(),
            r.d_h.to_string(),
            r.k.to_string(),
            r.k_inf.map(|k| k.to_string()).unwrap_or_default(),
            r.p.to_string(),
            r.delta.to_string(),
            r.delta_prime.to_string(),
            r.hardy_a_p.to_string(),
            r.hardy_a_p_pow.to_string(),
            r.hardy_valid.to_string(),
            r.hardy_convex.to_string(),
            opt(r.rellich_c_p),
            opt(r.rellich_big_c_p),
            r.rellich_valid.to_string(),
        ];
        row.extend(status_cells(&r.mu_p_status));
        row.extend(status_cells(&r.nu_p_status));
        t.row(&row);
        out.results.push(json!({ "spec_hash": hash, "report": r }));
    }
    out.csv = t.finish();
    Ok(out)
}

/// Lower bound for `functional`, or the reason the inequality is not available.
fn lower_bound(spec: &ProblemSpec, functional: Functional) -> Result<Result<f64, String>, CliError> {
    Ok(match functional {
        Functional::Hardy => {
            let h = hardy_constant(spec);
            if h.valid {
                Ok(h.a_p_pow)
            } else {
                Err(format!("Hardy condition D + min(delta, delta') - p > 0 not satisfied (value {})", h.b_p))
            }
        }
        Functional::Rellich => {
            let c = rellich_constants(spec).map_err(failed)?;
            if c.valid {
                Ok(c.big_c_p.powf(spec.p))
            } else {
                Err(format!(
                    "Rellich condition not satisfied: D + p m - 2p = {} against {}, b = {}",
                    c.condition_lhs, c.condition_rhs, c.b_alpha_p
                ))
            }
        }
    })
}

fn default_families(spec: &ProblemSpec, functional: Functional) -> Vec<TrialFamily> {
    let bounded = spec.geometry.k_inf.value() == Some(0);
    let mut out = vec![];
    if bounded {
        if functional == Functional::Hardy {
            out.push(TrialFamily::Chi);
        }
        out.push(TrialFamily::Sigma);
    }
    for regime in [Regime::Local, Regime::Growth] {
        out.push(match functional {
            Functional::Hardy => TrialFamily::hardy_extremal(spec, regime),
            Functional::Rellich => TrialFamily::rellich_extremal(spec, regime),
        });
    }
    out
}

#[derive(Debug, Serialize)]
struct VerifyRow {
    trial_id: String,
    n: f64,
    quotient: Option<f64>,
    error: Option<f64>,
    margin: Option<f64>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

pub fn verify(configs: &[ExperimentConfig], functional: Functional, expect_fail: bool) -> Result<Report, CliError> {
    let mut out = Report::default();
    let mut t = Table::new(&["spec_hash", "trial_id", "n", "quotient", "error", "lower_bound", "margin", "status"]);
    for c in configs {
        let spec = &c.spec;
        let hash = spec_hash(spec);
        let bound = match lower_bound(spec, functional)? {
            Ok(b) => b * if expect_fail { CORRUPTION } else { 1.0 },
            Err(why) => {
                out.preconditions.push(format!("{hash}: {why}"));
                out.results.push(json!({ "spec_hash": hash, "functional": functional, "precondition": why }));
                continue;
            }
        };
        let quad = c.quad();
        let tol = quad.rel_tol;
        let families = c.families.clone().unwrap_or_else(|| default_families(spec, functional));
        let n_list = c.n_list.clone().unwrap_or_else(default_n_list);
        let mut rows = vec![];
        for fam in &families {
            for &n in &n_list {
                let q = fam.trial(spec, n).and_then(|trial| match functional {
                    Functional::Hardy => hardy_quotient(spec, &trial, &quad),
                    Functional::Rellich => rellich_quotient(spec, &trial, &quad),
                });
                let row = match q {
                    Ok(q) => {
                        let violated = q.quotient + 3.0 * q.error < bound * (1.0 - 10.0 * tol);
                        VerifyRow {
                            trial_id: fam.id(),
                            n,
                            quotient: Some(q.quotient),
                            error: Some(q.error),
                            margin: Some(q.quotient - bound),
                            status: if violated { "violation" } else { "ok" },
                            message: None,
                        }
                    }
                    Err(e) => VerifyRow {
                        trial_id: fam.id(),
                        n,
                        quotient: None,
                        error: None,
                        margin: None,
                        status: "failed",
                        message: Some(e.to_string()),
                    },
                };
                if row.status == "violation" {
                    out.violations.push(format!("{hash}: {} at n={n}: quotient {} below {bound}", row.trial_id, row.quotient.unwrap_or(f64::NAN)));
                }
                t.row(&[
                    hash.clone(),
                    row.trial_id.clone(),
                    n.to_string(),
                    opt(row.quotient),
                    opt(row.error),
                    bound.to_string(),
                    opt(row.margin),
                    row.status.into(),
                ]);
                rows.push(row);
            }
        }
        let violations = rows.iter().filter(|r| r.status == "violation").count();
        let failures = rows.iter().filter(|r| r.status == "failed").count();
        out.results.push(json!({
            "spec_hash": hash,
            "functional": functional,
            "lower_bound": bound,
            "corrupted": expect_fail,
            "tol": tol,
            "rows": rows,
            "violations": violations,
            "failures": failures,
            "passed": violations == 0,
        }));
    }
    out.csv = t.finish();
    Ok(out)
}

pub fn bracket(configs: &[ExperimentConfig]) -> Result<Report, CliError> {
    let mut out = Report::default();
    let mut t = Table::new(&[
        "spec_hash", "functional", "lower", "upper", "theoretical_upper", "numerical_upper", "gap", "numerical_gap", "status", "reason",
    ]);
    for c in configs {
        let spec = &c.spec;
        let hash = spec_hash(spec);
        let functional = c.functional();
        let opts = BracketOptions { n_list: c.n_list.clone().unwrap_or_else(deep_n_list), quad: c.quad() };
        let b = match functional {
            Functional::Hardy => bracket_mu(spec, &opts),
            Functional::Rellich => bracket_nu(spec, &opts),
        };
        let b = match b {
            Ok(b) => b,
            Err(e @ Error::InvertedBracket { .. }) => {
                out.violations.push(format!("{hash}: {e}"));
                out.results.push(json!({ "spec_hash": hash, "functional": functional, "violation": e.to_string() }));
                continue;
            }
            Err(e) => return Err(failed(e)),
        };
        if b.lower.is_none() {
            out.preconditions.push(format!("{hash}: {}", b.diagnosis.clone().unwrap_or_else(|| "no lower bound".into())));
        }
        let [kind, _, _, reason] = status_cells(&b.status);
        t.row(&[
            hash.clone(),
            snake(&functional),
            opt(b.lower),
            opt(b.upper),
            opt(b.theoretical_upper),
            opt(b.numerical_upper),
            opt(b.gap),
            opt(b.numerical_gap),
            kind,
            reason,
        ]);
        out.results.push(json!({ "spec_hash": hash, "bracket": b }));
    }
    out.csv = t.finish();
    Ok(out)
}

pub fn geometry(configs: &[ExperimentConfig]) -> Result<Report, CliError> {
    let mut out = Report::default();
    let mut t = Table::new(&[
        "spec_hash", "d", "k", "d_h", "k_inf", "k_inf_estimate", "projection_idempotence", "obtuse_angle", "gradient_norm",
        "hessian_trace_margin", "segment_convexity", "passed",
    ]);
    for c in configs {
        let spec = &c.spec;
        let hash = spec_hash(spec);
        let checks = check_suite(&spec.body, c.samples.unwrap_or(1000), c.seed()).map_err(failed)?;
        if !checks.passed {
            out.violations.push(format!("{hash}: geometry checks failed"));
        }
        let g = &spec.geometry;
        t.row(&[
            hash.clone(),
            g.d.to_string(),
            g.k.to_string(),
            g.d_h.to_string(),
            g.k_inf.value().map(|k| k.to_string()).unwrap_or_default(),
            checks.k_inf.estimate.to_string(),
            checks.projection_idempotence.to_string(),
            checks.obtuse_angle.to_string(),
            checks.gradient_norm.to_string(),
            checks.hessian_trace_margin.to_string(),
            checks.segment_convexity.to_string(),
            checks.passed.to_string(),
        ]);
        out.results.push(json!({ "spec_hash": hash, "geometry": g, "checks": checks }));
    }
    out.csv = t.finish();
    Ok(out)
}

pub fn sweep(configs: &[ExperimentConfig]) -> Result<Report, CliError> {
    let mut out = Report::default();
    for c in configs {
        let spec = &c.spec;
        let functional = c.functional();
        let families = c.families.clone().unwrap_or_else(|| match functional {
            Functional::Hardy => vec![TrialFamily::hardy_extremal(spec, Regime::for_spec(spec))],
            Functional::Rellich => vec![TrialFamily::rellich_extremal(spec, Regime::for_spec(spec))],
        });
        let n_list = c.n_list.clone().unwrap_or_else(default_n_list);
        let mut sweeps = vec![];
        for fam in &families {
            let s = sequence_sweep(spec, functional, fam, &n_list, &c.quad()).map_err(failed)?;
            let table = sweep_csv(spec, &s).map_err(failed)?;
            if out.csv.is_empty() {
                out.csv = table;
            } else {
                out.csv.extend(table.lines().skip(1).map(|l| format!("{l}\n")));
            }
            sweeps.push(s);
        }
        out.results.push(json!({ "spec_hash": spec_hash(spec), "sweeps": sweeps }));
    }
    Ok(out)
}
