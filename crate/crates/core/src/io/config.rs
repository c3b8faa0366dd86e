//! TOML run configuration and experiment plans. Unknown keys are errors.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ecf::SlopeEstimator;
use crate::error::{Error, Result};
use crate::experiments::ExperimentPlan;
use crate::io::prices::Transform;
use crate::sim::ModelSpec;

/// Settings shared by the CLI subcommands. Command-line flags take
/// precedence over these, and these over built-in defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: Option<f64>,
    pub transform: Option<Transform>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub slope: Option<SlopeEstimator>,
    pub input: Option<PathBuf>,
    pub date_column: Option<String>,
    pub value_column: Option<String>,
    pub output: Option<PathBuf>,
    pub plan: Option<PathBuf>,
    pub model: Option<ModelSpec>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::invalid("alpha", format!("{a} is outside (0, 1)")));
            }
        }
        if let Some(m) = &self.model {
            m.validate()?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_plan(text: &str) -> Result<ExperimentPlan> {
    let plan: ExperimentPlan = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    plan.validate()?;
    Ok(plan)
}

pub fn load_plan(path: &Path) -> Result<ExperimentPlan> {
    parse_plan(&read(path)?)
}
