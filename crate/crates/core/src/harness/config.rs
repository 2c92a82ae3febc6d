//! TOML configuration files.
//!
//! ```toml
//! [link]
//! num_subcarriers = 64
//! snr_db = 20.0
//!
//! [channel]          # optional explicit profile
//! tap_delays = [0, 2]
//! tap_powers = [0.5, 0.5]
//! rho = 0.8
//!
//! [study]
//! snr_grid = [0.0, 10.0, 20.0]
//! trials = 5
//! boundary_set = 4
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::study::{BoundarySpec, ChannelSpec, StudyConfig, StudyKind};
use crate::channel::{ChannelProfile, StationarityMode};
use crate::controller::{BoundarySet, NUM_PATTERNS};
use crate::error::{Error, Result};
use crate::grid::LinkConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    pub snr_grid: Vec<f64>,
    pub symbols_per_point: usize,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_set: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_lower: Option<[f64; NUM_PATTERNS]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_upper: Option<[f64; NUM_PATTERNS]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_model: Option<usize>,
    pub stationarity_mode: StationarityMode,
}

impl Default for StudySection {
    fn default() -> Self {
        let d = StudyConfig::default();
        StudySection {
            snr_grid: d.snr_grid,
            symbols_per_point: d.symbols_per_point,
            trials: d.trials,
            boundary_set: None,
            boundary_lower: None,
            boundary_upper: None,
            channel_model: None,
            stationarity_mode: d.stationarity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub link: LinkConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelProfile>,
    pub study: StudySection,
}

impl FileConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: "<string>".into(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialize config: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn boundary_spec(&self) -> Result<BoundarySpec> {
        let s = &self.study;
        match (s.boundary_set, s.boundary_lower, s.boundary_upper) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                Err(Error::config("give either boundary_set or boundary_lower/boundary_upper, not both"))
            }
            (None, Some(lower), Some(upper)) => Ok(BoundarySpec::Explicit(BoundarySet::new(lower, upper)?)),
            (None, Some(_), None) | (None, None, Some(_)) => {
                Err(Error::config("boundary_lower and boundary_upper must be given together"))
            }
            (Some(id), None, None) => {
                BoundarySet::table(id)?;
                Ok(BoundarySpec::Table(id))
            }
            (None, None, None) => Ok(BoundarySpec::Table(4)),
        }
    }

    pub fn channel_spec(&self) -> Result<ChannelSpec> {
        match (&self.channel, self.study.channel_model) {
            (Some(_), Some(_)) => Err(Error::config("give either [channel] or study.channel_model, not both")),
            (Some(p), None) => {
                p.validate()?;
                Ok(ChannelSpec::Explicit(p.clone()))
            }
            (None, Some(m)) => {
                ChannelProfile::model(m)?;
                Ok(ChannelSpec::Model(m))
            }
            (None, None) => Ok(ChannelSpec::Model(2)),
        }
    }

    pub fn study_config(&self, kind: StudyKind) -> Result<StudyConfig> {
        Ok(StudyConfig {
            kind,
            snr_grid: self.study.snr_grid.clone(),
            symbols_per_point: self.study.symbols_per_point,
            trials: self.study.trials,
            boundaries: self.boundary_spec()?,
            channel: self.channel_spec()?,
            stationarity: self.study.stationarity_mode,
        })
    }
}
