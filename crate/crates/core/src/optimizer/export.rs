//! CSV export of sweeps.

use std::hash::Hasher;
use std::io::Write;
use std::path::Path;

use fnv::FnvHasher;

use super::SweepResult;
use crate::constants::ProblemSpec;
use crate::error::{Error, Result};

/// Version of every serialized report.
pub const SCHEMA_VERSION: &str = "1.0";

/// Stable 64-bit hash of the spec's JSON form, as 16 hex digits.
pub fn spec_hash(spec: &ProblemSpec) -> String {
    let json = serde_json::to_string(spec).expect("spec serializes");
    let mut h = FnvHasher::default();
    h.write(json.as_bytes());
    format!("{:016x}", h.finish())
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("export failed: {e}"))
}

/// Rows `spec_hash, trial_id, n, quotient, error, lower_bound, margin`.
pub fn sweep_csv(spec: &ProblemSpec, sweep: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["spec_hash", "trial_id", "n", "quotient", "error", "lower_bound", "margin"]).map_err(io)?;
    let hash = spec_hash(spec);
    let id = sweep.family.id();
    for i in 0..sweep.n.len() {
        let q = sweep.quotients[i];
        let (lb, margin) = match sweep.lower_bound {
            Some(l) => (l.to_string(), (q - l).to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([hash.clone(), id.clone(), sweep.n[i].to_string(), q.to_string(), sweep.errors[i].to_string(), lb, margin])
            .map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(io)?).map_err(io)
}

pub fn write_sweep_csv(path: &Path, spec: &ProblemSpec, sweep: &SweepResult) -> Result<()> {
    let s = sweep_csv(spec, sweep)?;
    std::fs::File::create(path).and_then(|mut f| f.write_all(s.as_bytes())).map_err(io)
}
