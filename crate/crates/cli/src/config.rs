//! Experiment configuration files and the flags that override them.

use std::path::Path;

use hardy_rellich::constants::ProblemSpec;
use hardy_rellich::functionals::QuadratureSpec;
use hardy_rellich::optimizer::{Functional, TrialFamily};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1.0";

/// One experiment. A file may hold this object or a bare problem spec.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub schema_version: Option<String>,
    pub spec: ProblemSpec,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub functional: Option<Functional>,
    #[serde(default)]
    pub families: Option<Vec<TrialFamily>>,
    #[serde(default)]
    pub n_list: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub functional: Option<Functional>,
}

impl ExperimentConfig {
    fn from_value(v: Value) -> Result<Self, CliError> {
        let is_config = v.as_object().is_some_and(|o| o.contains_key("spec"));
        let cfg = if is_config {
            serde_json::from_value::<ExperimentConfig>(v).map_err(|e| CliError::Config(format!("invalid config: {e}")))?
        } else {
            let spec = serde_json::from_value::<ProblemSpec>(v).map_err(|e| CliError::Config(format!("invalid spec: {e}")))?;
            ExperimentConfig {
                schema_version: None,
                spec,
                quadrature: None,
                functional: None,
                families: None,
                n_list: None,
                seed: None,
                samples: None,
            }
        };
        if let Some(v) = &cfg.schema_version {
            if v != SCHEMA_VERSION {
                return Err(CliError::Config(format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}")));
            }
        }
        Ok(cfg)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self, CliError> {
        let mut q = self.quadrature.unwrap_or_default();
        if let Some(seed) = o.seed {
            self.seed = Some(seed);
        }
        q.seed = self.seed.unwrap_or(q.seed);
        if let Some(t) = o.tol {
            q.rel_tol = t;
        }
        if let Some(n) = o.samples {
            self.samples = Some(n);
            q.samples = n;
        }
        q.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.quadrature = Some(q);
        if o.functional.is_some() {
            self.functional = o.functional;
        }
        if let Some(list) = &self.n_list {
            if list.iter().any(|n| !(*n > 1.0 && n.is_finite())) {
                return Err(CliError::Config("n_list entries must be finite and > 1".into()));
            }
        }
        Ok(self)
    }

    pub fn quad(&self) -> QuadratureSpec {
        self.quadrature.unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn functional(&self) -> Functional {
        self.functional.unwrap_or(Functional::Hardy)
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{} is not valid JSON: {e}", path.display())))
}

/// Configs from `--spec` (one) or `--grid` (a JSON array).
pub fn load(spec: Option<&Path>, grid: Option<&Path>, o: &Overrides) -> Result<Vec<ExperimentConfig>, CliError> {
    let values = match (spec, grid) {
        (Some(p), None) => vec![read_json(p)?],
        (None, Some(p)) => match read_json(p)? {
            Value::Array(items) if !items.is_empty() => items,
            _ => return Err(CliError::Config(format!("{} must hold a non-empty JSON array", p.display()))),
        },
        (None, None) => return Err(CliError::Config("one of --spec or --grid is required".into())),
        (Some(_), Some(_)) => return Err(CliError::Config("--spec and --grid are mutually exclusive".into())),
    };
    values.into_iter().map(|v| ExperimentConfig::from_value(v)?.apply(o)).collect()
}
