//! Run configuration: TOML (or JSON) on disk, fully resolved before use so
//! that --dump-config reproduces the run byte for byte.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::sync::Arc;
use wqft_core::jet::{JetDistribution, JetDistributionSpec};
use wqft_core::kernel::EpsSchedule;
use wqft_core::modes::ModeGrid;
use wqft_core::profile::{build_profile, Profile, ProfileSpec};
use wqft_core::wavefront::ScanConfig;
use wqft_core::worldline::{build_worldline, TransportRule, Worldline};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mass: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub worldline: WorldlineSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub epsilon: EpsConfig,
    #[serde(default)]
    pub omega: OmegaConfig,
    #[serde(default)]
    pub window: Option<WindowSpec>,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub distributions: Vec<JetDistributionSpec>,
    #[serde(default)]
    pub wavefront: WavefrontConfig,
    #[serde(default)]
    pub translate: TranslateConfig,
    #[serde(default)]
    pub commutator: CommutatorConfig,
}

fn default_seed() -> u64 {
    0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldlineSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub radial_panels: usize,
    pub l_max: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { r_max: 12.0, radial_panels: 16, l_max: 3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsConfig {
    pub start: f64,
    pub factor: f64,
    pub count: usize,
}

impl Default for EpsConfig {
    fn default() -> Self {
        EpsConfig { start: 1e-2, factor: 0.5, count: 7 }
    }
}

impl EpsConfig {
    pub fn schedule(&self) -> EpsSchedule {
        EpsSchedule { start: self.start, factor: self.factor, count: self.count }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OmegaConfig {
    #[serde(default)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowSpec {
    pub family: String,
    pub params: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub backend: String,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { backend: "mode-integral".into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefrontConfig {
    pub decades: f64,
    pub radii_per_decade: usize,
    pub r_min: f64,
    pub n_max: f64,
    pub spatial_directions: usize,
    pub mixed_directions: usize,
}

impl Default for WavefrontConfig {
    fn default() -> Self {
        WavefrontConfig {
            decades: 3.0,
            radii_per_decade: 10,
            r_min: 1.0,
            n_max: 6.0,
            spatial_directions: 16,
            mixed_directions: 16,
        }
    }
}

impl WavefrontConfig {
    pub fn scan(&self) -> ScanConfig {
        ScanConfig {
            decades: self.decades,
            radii_per_decade: self.radii_per_decade,
            r_min: self.r_min,
            n_max: self.n_max,
            noise_floor: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslateConfig {
    pub count: usize,
    pub step: f64,
    pub steps: i64,
    pub rule: TransportRule,
}

impl Default for TranslateConfig {
    fn default() -> Self {
        TranslateConfig { count: 6, step: 0.5, steps: 1, rule: TransportRule::FermiWalker }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CommutatorConfig {
    /// spatial separation of the second curve along x
    #[serde(default)]
    pub separation: f64,
    /// time offset of the second curve
    #[serde(default)]
    pub time_offset: f64,
}

impl RunConfig {
    pub fn load(path: &str) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.into(), source })?;
        RunConfig::parse(&text)
    }

    /// TOML first, JSON as fallback.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        match toml::from_str::<RunConfig>(text) {
            Ok(c) => {
                c.validate()?;
                Ok(c)
            }
            Err(toml_err) => match serde_json::from_str::<RunConfig>(text) {
                Ok(c) => {
                    c.validate()?;
                    Ok(c)
                }
                Err(json_err) => Err(ConfigError::Parse(format!(
                    "not valid TOML ({toml_err}) nor JSON ({json_err})"
                ))),
            },
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.mass < 0.0 {
            return Err(ConfigError::Invalid(format!("mass must be >= 0, got {}", self.mass)));
        }
        if self.grid.r_max <= 0.0 || self.grid.radial_panels == 0 {
            return Err(ConfigError::Invalid("grid r_max and radial_panels must be positive".into()));
        }
        if self.epsilon.start <= 0.0
            || !(0.0 < self.epsilon.factor && self.epsilon.factor < 1.0)
            || self.epsilon.count == 0
        {
            return Err(ConfigError::Invalid("epsilon schedule must be positive and decreasing".into()));
        }
        if self.translate.count == 0 || self.translate.step <= 0.0 {
            return Err(ConfigError::Invalid("translate lattice needs count >= 1, step > 0".into()));
        }
        Ok(())
    }

    pub fn resolved_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_worldline(&self) -> Result<Worldline, ConfigError> {
        build_worldline(&self.worldline.kind, &self.worldline.params)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn build_grid(&self) -> Result<Arc<ModeGrid>, ConfigError> {
        ModeGrid::new(self.mass, self.grid.r_max, self.grid.radial_panels, self.grid.l_max)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn build_window(&self) -> Result<Profile, ConfigError> {
        let spec = self
            .window
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing [window] section".into()))?;
        build_profile(&ProfileSpec::Family {
            family: spec.family.clone(),
            params: spec.params.clone(),
        })
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn build_distributions(&self) -> Result<Vec<JetDistribution>, ConfigError> {
        let w = self.build_worldline()?;
        self.distributions
            .iter()
            .map(|spec| {
                JetDistribution::from_spec(spec, w.clone())
                    .map_err(|e| ConfigError::Invalid(e.to_string()))
            })
            .collect()
    }
}
