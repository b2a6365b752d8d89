//! JSON configuration files.
//!
//! A config mirrors [`ExperimentConfig`]: `params` is always required;
//! `bounds`, `trials` and `master_seed` are required by `simulate` only.
//!
//! ```json
//! {
//!   "params": {"n": 16, "m": 12, "p": 0.125, "mu1": 0.0, "sigma1": 1.0, "sigma_e": 0.25},
//!   "bounds": {"beta": 2.0, "beta_bar": 25.0},
//!   "trials": 500,
//!   "master_seed": 7,
//!   "solver": "exhaustive",
//!   "cardinality_q": 2.0,
//!   "rip_mode": "exhaustive"
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sparsemap_core::bounds::BoundParams;
use sparsemap_core::harness::ExperimentConfig;
use sparsemap_core::solver::SolverKind;
use sparsemap_core::{ModelParams, RipMode};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub params: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinality_q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rip_mode: Option<RipMode>,
    #[serde(skip)]
    pub source: PathBuf,
}

impl From<&ExperimentConfig> for ConfigFile {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            params: c.params,
            bounds: Some(c.bounds),
            trials: Some(c.trials),
            master_seed: Some(c.master_seed),
            solver: Some(c.solver),
            cardinality_q: Some(c.cardinality_q),
            rip_mode: Some(c.rip_mode),
            source: PathBuf::new(),
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text).map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        cfg.source = path.to_path_buf();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: ConfigFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.params.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn missing(&self, field: &str) -> CliError {
        CliError::Config {
            path: self.source.clone(),
            message: format!("missing field `{field}`"),
        }
    }

    /// Full experiment description; `solver`, `cardinality_q` and `rip_mode`
    /// default to exhaustive, 2 and exhaustive.
    pub fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        let config = ExperimentConfig {
            params: self.params,
            bounds: self.bounds.ok_or_else(|| self.missing("bounds"))?,
            trials: self.trials.ok_or_else(|| self.missing("trials"))?,
            master_seed: self
                .master_seed
                .ok_or_else(|| self.missing("master_seed"))?,
            solver: self.solver.unwrap_or(SolverKind::Exhaustive),
            cardinality_q: self.cardinality_q.unwrap_or(2.0),
            rip_mode: self.rip_mode.unwrap_or(RipMode::Exhaustive),
        };
        config.validate().map_err(|e| CliError::Config {
            path: self.source.clone(),
            message: e.to_string(),
        })?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_document() {
        let text = r#"{
            "params": {"n": 16, "m": 12, "p": 0.125, "mu1": 0.0, "sigma1": 1.0, "sigma_e": 0.25},
            "bounds": {"beta": 2.0, "beta_bar": 25.0},
            "trials": 10, "master_seed": 3, "solver": "greedy",
            "cardinality_q": 2.5, "rip_mode": {"sampled": 40}
        }"#;
        let cfg = ConfigFile::parse(text).unwrap();
        let exp = cfg.experiment().unwrap();
        assert_eq!(exp.solver, SolverKind::Greedy);
        assert_eq!(exp.rip_mode, RipMode::Sampled(40));
        assert_eq!(exp.cardinality_q, 2.5);
        let back = serde_json::to_string(&ConfigFile::from(&exp)).unwrap();
        assert_eq!(ConfigFile::parse(&back).unwrap().experiment().unwrap(), exp);
    }

    #[test]
    fn params_only_is_enough_for_constants() {
        let text = r#"{"params": {"n": 4096, "m": 256, "p": 0.01, "mu1": 0.0, "sigma1": 25.0, "sigma_e": 1.0}}"#;
        let cfg = ConfigFile::parse(text).unwrap();
        assert!(cfg.bounds.is_none());
        assert!(matches!(cfg.experiment(), Err(CliError::Config { .. })));
    }

    #[test]
    fn rejects_unknown_fields_and_bad_params() {
        assert!(ConfigFile::parse(r#"{"params": {"n": 4, "m": 2, "p": 0.1, "mu1": 0, "sigma1": 1, "sigma_e": 1}, "extra": 1}"#).is_err());
        assert!(ConfigFile::parse(
            r#"{"params": {"n": 4, "m": 2, "p": 0.7, "mu1": 0, "sigma1": 1, "sigma_e": 1}}"#
        )
        .is_err());
    }
}
