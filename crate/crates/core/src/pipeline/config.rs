//! Pipeline tunables, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::phantoms::PhantomSpec;

/// Derivative threshold for Module 1: the area under the derivative curve
/// (`"auto"`) or a fixed number of voxels per unit of `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "ThresholdRepr", into = "ThresholdRepr")]
pub enum DtThreshold {
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ThresholdRepr {
    Word(String),
    Number(f64),
}

impl TryFrom<ThresholdRepr> for DtThreshold {
    type Error = String;

    fn try_from(r: ThresholdRepr) -> std::result::Result<Self, String> {
        match r {
            ThresholdRepr::Word(w) if w == "auto" => Ok(DtThreshold::Auto),
            ThresholdRepr::Word(w) => Err(format!("dt_threshold must be \"auto\" or a number, got {w:?}")),
            ThresholdRepr::Number(v) if v.is_finite() && v >= 0.0 => Ok(DtThreshold::Fixed(v)),
            ThresholdRepr::Number(v) => Err(format!("dt_threshold {v} must be finite and nonnegative")),
        }
    }
}

impl From<DtThreshold> for ThresholdRepr {
    fn from(t: DtThreshold) -> Self {
        match t {
            DtThreshold::Auto => ThresholdRepr::Word("auto".into()),
            DtThreshold::Fixed(v) => ThresholdRepr::Number(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preprocessing {
    /// Gaussian blur standard deviation in voxels; 0 disables.
    pub sigma: f64,
    /// Grey dilation ball radius in voxels; 0 disables.
    pub dilation_radius: usize,
}

impl Preprocessing {
    pub const NONE: Preprocessing = Preprocessing {
        sigma: 0.0,
        dilation_radius: 0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskPreprocessing {
    pub brain: Preprocessing,
    pub cardiac: Preprocessing,
    pub fetal: Preprocessing,
}

impl Default for TaskPreprocessing {
    fn default() -> Self {
        TaskPreprocessing {
            brain: Preprocessing {
                sigma: 1.0,
                dilation_radius: 2,
            },
            cardiac: Preprocessing {
                sigma: 2.5,
                dilation_radius: 1,
            },
            fetal: Preprocessing {
                sigma: 0.5,
                dilation_radius: 0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FetalSelector {
    EarliestBirth,
    #[default]
    LargestArea,
    MostPersistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub dt_threshold: DtThreshold,
    pub curve_samples: usize,
    pub preprocessing: TaskPreprocessing,
    pub top_n_h0: usize,
    pub top_n_h0_rv: usize,
    pub fetal_area_bounds: [f64; 2],
    pub fetal_epsilon: f64,
    pub fetal_selector: FetalSelector,
    pub lv_dilation_max_steps: usize,
    /// Long axis of cardiac volumes.
    pub cardiac_axis: usize,
    /// Grey erosion radius applied to cardiac volumes before Myo detection,
    /// closing small gaps in the dark wall; 0 disables.
    pub myo_closing_radius: usize,
    /// Slicing axis for fetal volumes.
    pub fetal_axis: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            dt_threshold: DtThreshold::Auto,
            curve_samples: 256,
            preprocessing: TaskPreprocessing::default(),
            top_n_h0: 5,
            top_n_h0_rv: 20,
            fetal_area_bounds: [0.25, 0.75],
            fetal_epsilon: 0.1,
            fetal_selector: FetalSelector::LargestArea,
            lv_dilation_max_steps: 64,
            cardiac_axis: 2,
            myo_closing_radius: 0,
            fetal_axis: 2,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.fetal_area_bounds;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::Config(format!(
                "fetal_area_bounds must satisfy 0 < lower < upper < 1, got [{lo}, {hi}]"
            )));
        }
        if self.curve_samples < 16 {
            return Err(Error::Config(format!(
                "curve_samples must be at least 16, got {}",
                self.curve_samples
            )));
        }
        if self.top_n_h0 < 1 || self.top_n_h0_rv < 1 {
            return Err(Error::Config("top_n_h0 and top_n_h0_rv must be at least 1".into()));
        }
        if !(self.fetal_epsilon >= 0.0) {
            return Err(Error::Config("fetal_epsilon must be nonnegative".into()));
        }
        if self.cardiac_axis > 2 || self.fetal_axis > 2 {
            return Err(Error::Config("axes must be 0, 1 or 2".into()));
        }
        let p = &self.preprocessing;
        for (name, prep) in [("brain", p.brain), ("cardiac", p.cardiac), ("fetal", p.fetal)] {
            if !(prep.sigma >= 0.0) || !prep.sigma.is_finite() {
                return Err(Error::Config(format!("preprocessing.{name}.sigma must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Whole configuration document: `[pipeline]` and `[phantom]` tables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub pipeline: PipelineConfig,
    pub phantom: PhantomSpec,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.pipeline.validate()?;
        cfg.phantom.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Config::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip() {
        let cfg = Config::default();
        let back = Config::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.digest(), cfg.digest());
    }

    #[test]
    fn partial_document() {
        let cfg = Config::from_toml(
            "[pipeline]\ndt_threshold = 1500.0\nfetal_selector = \"earliest-birth\"\n[pipeline.preprocessing.brain]\nsigma = 0.0\ndilation_radius = 0\n",
        )
        .unwrap();
        assert_eq!(cfg.pipeline.dt_threshold, DtThreshold::Fixed(1500.0));
        assert_eq!(cfg.pipeline.fetal_selector, FetalSelector::EarliestBirth);
        assert_eq!(cfg.pipeline.preprocessing.brain, Preprocessing::NONE);
        assert_eq!(cfg.pipeline.curve_samples, 256);
        assert_ne!(cfg.digest(), Config::default().digest());
    }

    #[test]
    fn invalid_values() {
        assert!(Config::from_toml("[pipeline]\nfetal_area_bounds = [0.8, 0.2]\n").is_err());
        assert!(Config::from_toml("[pipeline]\ncurve_samples = 4\n").is_err());
        assert!(Config::from_toml("[pipeline]\ndt_threshold = \"sometimes\"\n").is_err());
        assert!(Config::from_toml("[pipeline]\nunknown_key = 1\n").is_err());
    }
}
