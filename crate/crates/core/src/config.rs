//! Run configuration, loaded from TOML. Every field has a default, so an
//! empty document is valid.
//!
//! ```toml
//! seed = 7
//! format = "json"
//! tau_grid = [0.1, 0.05, 0.025, 0.0125]
//!
//! [caps]
//! autonomous = 8
//! nonautonomous = 10
//!
//! [search]
//! feasibility_tol = 1e-10
//! infeasibility_floor = 1e-4
//!
//! [experiments]
//! e2_starts = 200
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::order::{AUTONOMOUS_MAX_CHECK, NONAUTONOMOUS_MAX_CHECK};
use crate::search::SearchSettings;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Parse(String),
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    pub autonomous: u32,
    pub nonautonomous: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            autonomous: AUTONOMOUS_MAX_CHECK,
            nonautonomous: NONAUTONOMOUS_MAX_CHECK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    pub e1_starts: usize,
    pub e1_stages: Vec<usize>,
    pub e2_starts: usize,
    pub e2_max_b_factors: usize,
    /// starts for the informational run in the `t^2` model; 0 skips it
    pub e2_k2_starts: usize,
    pub e3_starts: usize,
    pub e3_max_stages: usize,
    pub stiff_grid_size: usize,
    pub identity_schemes: usize,
    pub recovery_starts: usize,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            e1_starts: 200,
            e1_stages: vec![3, 4],
            e2_starts: 500,
            e2_max_b_factors: 5,
            e2_k2_starts: 100,
            e3_starts: 500,
            e3_max_stages: 5,
            stiff_grid_size: 100,
            identity_schemes: 50,
            recovery_starts: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub format: OutputFormat,
    pub tau_grid: Vec<f64>,
    pub caps: Caps,
    pub search: SearchSettings,
    pub experiments: ExperimentSettings,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 20240601,
            format: OutputFormat::Text,
            tau_grid: crate::numerics::standard_tau_grid(),
            caps: Caps::default(),
            search: SearchSettings::default(),
            experiments: ExperimentSettings::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.caps.autonomous > AUTONOMOUS_MAX_CHECK {
            return bad(format!("caps.autonomous must be at most {AUTONOMOUS_MAX_CHECK}"));
        }
        if self.caps.nonautonomous > NONAUTONOMOUS_MAX_CHECK {
            return bad(format!("caps.nonautonomous must be at most {NONAUTONOMOUS_MAX_CHECK}"));
        }
        if self.tau_grid.len() < 4 {
            return bad("tau_grid needs at least 4 step sizes".into());
        }
        if self.tau_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("tau_grid entries must be positive".into());
        }
        if self.tau_grid.windows(2).any(|w| ((w[0] / w[1]) - 2.0).abs() > 1e-9) {
            return bad("tau_grid must halve from one entry to the next".into());
        }
        let s = &self.search;
        if !(s.feasibility_tol > 0.0 && s.feasibility_tol < s.infeasibility_floor) {
            return bad("need 0 < search.feasibility_tol < search.infeasibility_floor".into());
        }
        if s.max_denominator == 0 {
            return bad("search.max_denominator must be positive".into());
        }
        let e = &self.experiments;
        if e.e2_max_b_factors == 0 || e.e2_max_b_factors > 5 || e.e3_max_stages == 0 || e.e3_max_stages > 5 {
            return bad("stage caps must be between 1 and 5".into());
        }
        if e.e1_stages.iter().any(|&s| s < 3) {
            return bad("experiments.e1_stages entries must be at least 3".into());
        }
        if e.stiff_grid_size < 16 {
            return bad("experiments.stiff_grid_size must be at least 16".into());
        }
        if e.e1_starts == 0 || e.e2_starts == 0 || e.e3_starts == 0 || e.recovery_starts == 0 {
            return bad("experiment start counts must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn overrides_and_rejections() {
        let c = Config::from_toml("seed = 5\n[search]\nfeasibility_tol = 1e-9\n").unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.search.feasibility_tol, 1e-9);
        assert_eq!(c.search.infeasibility_floor, 1e-4);
        assert!(Config::from_toml("[caps]\nautonomous = 9\n").is_err());
        assert!(Config::from_toml("tau_grid = [0.1, 0.05, 0.02, 0.01]\n").is_err());
        assert!(Config::from_toml("colour = 1\n").is_err());
        assert!(Config::from_toml("[search]\nfeasibility_tol = 1e-3\n").is_err());
    }
}
