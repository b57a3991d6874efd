use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{DecimalLocale, DEFAULT_HORIZON};
use crate::error::{Error, Result};
use crate::eval::FeatureConfig;
use crate::ga::DEFAULT_PRESETS;
use crate::tuning::ModelFamily;

pub const DEFAULT_SEED: u64 = 42;

/// GA population size and generation count of one grid column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preset {
    pub population: usize,
    pub generations: usize,
}

impl Preset {
    pub fn label(self) -> String {
        format!("p{}g{}", self.population, self.generations)
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    /// Parses `POP:GEN`, e.g. `20:10`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("preset `{s}` is not POPULATION:GENERATIONS"));
        let (p, g) = s.split_once(':').ok_or_else(bad)?;
        Ok(Preset {
            population: p.trim().parse().map_err(|_| bad())?,
            generations: g.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// Input files; each has a `<file>.meta` sidecar. Relative paths are
/// resolved against the config file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    #[serde(default)]
    pub targets: Vec<PathBuf>,
    #[serde(default)]
    pub exogenous: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSettings {
    pub mutation_probability: f64,
    pub elite_fraction: f64,
}

impl Default for GaSettings {
    fn default() -> Self {
        Self {
            mutation_probability: 0.1,
            elite_fraction: 0.1,
        }
    }
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_base_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_arms() -> Vec<FeatureConfig> {
    vec![FeatureConfig::WithClimate, FeatureConfig::WithoutClimate]
}

fn default_families() -> Vec<ModelFamily> {
    ModelFamily::ALL.to_vec()
}

fn default_presets() -> Vec<Preset> {
    DEFAULT_PRESETS
        .iter()
        .map(|&(population, generations)| Preset { population, generations })
        .collect()
}

/// Experiment settings read from TOML; every field has a default.
///
/// ```toml
/// seed = 42
/// horizon = 12
/// locale = "period"
/// arms = ["with-climate", "without-climate"]
/// families = ["rf", "svr"]
///
/// [data]
/// targets = ["data/water_monthly.csv"]
/// exogenous = ["data/activity_hourly.csv", "data/climate_daily.csv"]
///
/// [[presets]]
/// population = 100
/// generations = 200
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub data: DataPaths,
    #[serde(default)]
    pub locale: DecimalLocale,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_arms")]
    pub arms: Vec<FeatureConfig>,
    #[serde(default = "default_presets")]
    pub presets: Vec<Preset>,
    #[serde(default = "default_families")]
    pub families: Vec<ModelFamily>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub ga: GaSettings,
    /// Output directory; a timestamped directory under `runs/` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Worker threads; all cores when absent. Never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Directory that relative data paths are resolved against.
    #[serde(skip, default = "default_base_dir")]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataPaths::default(),
            locale: DecimalLocale::default(),
            horizon: DEFAULT_HORIZON,
            arms: default_arms(),
            presets: default_presets(),
            families: default_families(),
            seed: DEFAULT_SEED,
            ga: GaSettings::default(),
            out: None,
            workers: None,
            base_dir: default_base_dir(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.families.is_empty() {
            return Err(Error::Config("at least one model family is required".into()));
        }
        if self.presets.is_empty() {
            return Err(Error::Config("at least one GA preset is required".into()));
        }
        if self.arms.is_empty() {
            return Err(Error::Config("at least one feature arm is required".into()));
        }
        if self.presets.iter().any(|p| p.population < 2 || p.generations == 0) {
            return Err(Error::Config(
                "presets need a population of at least 2 and at least one generation".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Settings that determine results: no output location or worker count.
    pub fn snapshot(&self) -> ExperimentConfig {
        ExperimentConfig {
            out: None,
            workers: None,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_the_full_grid() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg.horizon, 12);
        assert_eq!(cfg.presets.len(), 3);
        assert_eq!(cfg.arms.len() * cfg.families.len() * cfg.presets.len(), 12);
        cfg.validate().unwrap();
    }

    #[test]
    fn parses_sections() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            seed = 7
            locale = "comma"
            families = ["svr"]
            arms = ["without-climate"]
            [data]
            targets = ["a.csv"]
            [[presets]]
            population = 20
            generations = 10
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.locale, DecimalLocale::Comma);
        assert_eq!(cfg.families, vec![ModelFamily::Svr]);
        assert_eq!(cfg.presets, vec![Preset { population: 20, generations: 10 }]);
        assert_eq!(cfg.data.targets, vec![PathBuf::from("a.csv")]);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(ExperimentConfig::from_toml("horizon = 0").unwrap().validate().is_err());
        assert!(ExperimentConfig::from_toml("families = []").unwrap().validate().is_err());
        assert!(ExperimentConfig::from_toml("presets = []").unwrap().validate().is_err());
        assert!(ExperimentConfig::from_toml("colour = 1").is_err());
    }

    #[test]
    fn preset_syntax() {
        assert_eq!("20:10".parse::<Preset>().unwrap(), Preset { population: 20, generations: 10 });
        assert!("20".parse::<Preset>().is_err());
        assert!("a:b".parse::<Preset>().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
