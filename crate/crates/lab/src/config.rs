use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Overrides of the core library's comparison tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel: Option<f64>,
}

/// Run parameters shared by every experiment.
///
/// `dims` counts the basis vectors of the working support: `e_0 .. e_{dims-1}`
/// for hyperbolic experiments, `e_1 .. e_dims` for Hilbert ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dims: u32,
    pub trials: u32,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    /// Probe points per trial.
    #[serde(default = "default_probes")]
    pub probes: u32,
    /// Grid spacing of the no-dense-conjugacy search.
    #[serde(default = "default_resolution")]
    pub resolution: f64,
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_t() -> f64 {
    1.0
}

fn default_probes() -> u32 {
    3
}

fn default_resolution() -> f64 {
    1e-3
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn new(seed: u64, dims: u32, trials: u32) -> Self {
        Self {
            seed,
            dims,
            trials,
            epsilon: default_epsilon(),
            t: default_t(),
            tolerances: None,
            probes: default_probes(),
            resolution: default_resolution(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.dims < 3 {
            return fail("dims must be at least 3");
        }
        if self.trials < 1 {
            return fail("trials must be at least 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return fail("epsilon must be positive");
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return fail("t must be positive");
        }
        if self.probes < 1 {
            return fail("probes must be at least 1");
        }
        if !(self.resolution > 0.0 && self.resolution <= 0.5) {
            return fail("resolution must lie in (0, 0.5]");
        }
        if let Some(t) = &self.tolerances {
            for v in [t.abs, t.rel].into_iter().flatten() {
                if !(v > 0.0 && v.is_finite()) {
                    return fail("tolerances must be positive");
                }
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the config with defaults filled in.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_rejections() {
        let cfg = ExperimentConfig::from_json(r#"{"seed": 1, "dims": 4, "trials": 2}"#).unwrap();
        assert_eq!(cfg.epsilon, 0.05);
        assert_eq!(cfg.t, 1.0);
        assert_eq!(cfg.probes, 3);
        let explicit =
            ExperimentConfig::from_json(r#"{"seed": 1, "dims": 4, "trials": 2, "epsilon": 0.05}"#)
                .unwrap();
        assert_eq!(cfg.digest(), explicit.digest());
        for bad in [
            r#"{"seed": 1, "dims": 4, "trials": 2, "colour": 3}"#,
            r#"{"seed": 1, "dims": 2, "trials": 2}"#,
            r#"{"seed": 1, "dims": 4, "trials": 0}"#,
            r#"{"dims": 4, "trials": 1}"#,
            r#"{"seed": 1, "dims": 4, "trials": 1, "tolerances": {"abs": 1e-9, "x": 1}}"#,
            r#"{"seed": 1, "dims": 4, "trials": 1, "t": -1}"#,
        ] {
            assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
        }
    }
}
