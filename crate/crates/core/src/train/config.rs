use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::MlpParams;
use crate::varifold::Representation;
use crate::{Error, Result};

/// Training hyperparameters. Missing JSON fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dims: Vec<usize>,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub split_fraction: f64,
    /// When set, every measure is rescaled to this total mass before it is
    /// seen by the model.
    pub mass_normalization: Option<f64>,
    pub representation: Representation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dims: vec![6, 16, 64, 10],
            lr: 0.005,
            epochs: 100,
            batch_size: 32,
            seed: 0,
            split_fraction: 0.8,
            mass_normalization: None,
            representation: Representation::Varifold,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        MlpParams::zeros(&self.dims)?;
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split fraction must be in (0, 1), got {}",
                self.split_fraction
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if let Some(t) = self.mass_normalization {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("mass target must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}
