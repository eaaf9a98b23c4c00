//! Experiment configuration read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::SystemSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig1Repro,
    RateCheck,
    #[serde(rename = "theorem37-check")]
    AsymptoticCheck,
    BoundsReport,
    DepmatrixDemo,
}

impl Preset {
    pub const ALL: [Preset; 5] =
        [Preset::Fig1Repro, Preset::RateCheck, Preset::AsymptoticCheck, Preset::BoundsReport, Preset::DepmatrixDemo];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1Repro => "fig1-repro",
            Preset::RateCheck => "rate-check",
            Preset::AsymptoticCheck => "theorem37-check",
            Preset::BoundsReport => "bounds-report",
            Preset::DepmatrixDemo => "depmatrix-demo",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown preset {s:?}")))
    }

    pub fn default_replications(self) -> usize {
        match self {
            Preset::Fig1Repro | Preset::AsymptoticCheck | Preset::BoundsReport => 50,
            Preset::RateCheck => 30,
            Preset::DepmatrixDemo => 1,
        }
    }
}

/// Overrides for the online stage of the sigmoid example.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnlineOverrides {
    pub n2: Option<usize>,
    pub lambda: Option<f64>,
    pub d: Option<f64>,
    pub gamma: Option<f64>,
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    #[serde(default)]
    pub seed: u64,
    pub replications: Option<usize>,
    /// Target length `T`.
    pub horizon: Option<usize>,
    /// `T` sweep of the rate and dependency presets.
    pub horizons: Option<Vec<usize>>,
    pub n1: Option<usize>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Adds median columns next to the 10/90 bands.
    #[serde(default)]
    pub medians: bool,
    /// TOML system spec replacing the preset's source system (rate-check only).
    pub spec: Option<PathBuf>,
    pub predictor: Option<OnlineOverrides>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn new(preset: Preset) -> Self {
        ExperimentConfig {
            preset,
            seed: 0,
            replications: None,
            horizon: None,
            horizons: None,
            n1: None,
            out_dir: default_out_dir(),
            medians: false,
            spec: None,
            predictor: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let (Some(spec), Some(dir)) = (&cfg.spec, path.parent()) {
            if spec.is_relative() {
                cfg.spec = Some(dir.join(spec));
            }
        }
        Ok(cfg)
    }

    pub fn replications(&self) -> usize {
        self.replications.unwrap_or(self.preset.default_replications())
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == Some(0) {
            return Err(Error::invalid("replications must be at least 1"));
        }
        if self.horizon == Some(0) || self.n1 == Some(0) {
            return Err(Error::invalid("horizon and n1 must be at least 1"));
        }
        if let Some(h) = &self.horizons {
            if h.is_empty() || h.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("horizons must be nonempty and strictly increasing"));
            }
        }
        if self.spec.is_some() && self.preset != Preset::RateCheck {
            return Err(Error::invalid("a spec override is only accepted by rate-check"));
        }
        Ok(())
    }

    /// The referenced spec, validated.
    pub fn load_spec(&self) -> Result<Option<SystemSpec<f64>>> {
        let Some(path) = &self.spec else { return Ok(None) };
        let spec: SystemSpec<f64> = toml::from_str(&std::fs::read_to_string(path)?)?;
        spec.validate()?;
        Ok(Some(spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml("preset = \"rate-check\"\nseed = 3\nhorizons = [10, 20]\n").unwrap();
        assert_eq!(cfg.preset, Preset::RateCheck);
        assert_eq!(cfg.replications(), 30);
        assert_eq!(cfg.out_dir, PathBuf::from("out"));
    }

    #[test]
    fn rejects_unsorted_sweep() {
        assert!(ExperimentConfig::from_toml("preset = \"rate-check\"\nhorizons = [20, 20]\n").is_err());
        assert!(ExperimentConfig::from_toml("preset = \"rate-check\"\nhorizons = [30, 20]\n").is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_presets() {
        assert!(ExperimentConfig::from_toml("preset = \"fig1-repro\"\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("preset = \"fig9\"\n").is_err());
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::parse(p.name()).unwrap(), p);
            let text = format!("preset = \"{}\"\n", p.name());
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap().preset, p);
        }
    }
}
