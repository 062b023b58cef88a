use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{GapConfig, GapRule, GmmConfig, JumpConfig, SlopeConfig};
use crate::error::{Error, Result};
use crate::instability::{InstabilityConfig, Mode};
use crate::kmeans::KMeansConfig;
use crate::scenarios::ScenarioSpec;
use crate::seed::SeedSpec;

/// A selector evaluated by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ModelBased,
    ModelBasedNormalized,
    ModelFree,
    ModelFreeNormalized,
    Gap,
    Jump,
    Slope,
    GmmBic,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::ModelBased,
        Method::ModelBasedNormalized,
        Method::ModelFree,
        Method::ModelFreeNormalized,
        Method::Gap,
        Method::Jump,
        Method::Slope,
        Method::GmmBic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::ModelBased => "model-based",
            Method::ModelBasedNormalized => "model-based-normalized",
            Method::ModelFree => "model-free",
            Method::ModelFreeNormalized => "model-free-normalized",
            Method::Gap => "gap",
            Method::Jump => "jump",
            Method::Slope => "slope",
            Method::GmmBic => "gmm-bic",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown method {name:?}")))
    }

    /// The instability variant behind this method, with its normalization flag.
    pub fn instability(self) -> Option<(Mode, bool)> {
        match self {
            Method::ModelBased => Some((Mode::ModelBased, false)),
            Method::ModelBasedNormalized => Some((Mode::ModelBased, true)),
            Method::ModelFree => Some((Mode::ModelFree, false)),
            Method::ModelFreeNormalized => Some((Mode::ModelFree, true)),
            _ => None,
        }
    }
}

/// A scenario given either by preset name or by a full specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioEntry {
    Preset(String),
    Custom { name: String, spec: ScenarioSpec },
}

impl ScenarioEntry {
    pub fn name(&self) -> &str {
        match self {
            ScenarioEntry::Preset(name) => name,
            ScenarioEntry::Custom { name, .. } => name,
        }
    }

    pub fn spec(&self) -> Result<ScenarioSpec> {
        let spec = match self {
            ScenarioEntry::Preset(name) => ScenarioSpec::preset(name)?,
            ScenarioEntry::Custom { spec, .. } => spec.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

/// Everything a harness run depends on. Loaded from TOML; every field has a
/// default. `workers` and `out` do not affect results and are left out of
/// the config echo written with the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenarios: Vec<ScenarioEntry>,
    /// External dataset used instead of generated scenarios.
    pub data: Option<PathBuf>,
    pub iterations: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// Bootstrap pairs per `k` for the instability methods.
    pub bootstraps: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub workers: usize,
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub format: OutputFormat,
    /// k-means settings of the instability methods.
    pub kmeans: KMeansConfig,
    pub gap: GapConfig,
    pub jump: JumpConfig,
    pub slope: SlopeConfig,
    pub gmm: GmmConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenarios: vec![ScenarioEntry::Preset("circular-3".into())],
            data: None,
            iterations: 100,
            k_min: 2,
            k_max: 50,
            bootstraps: 100,
            methods: Method::ALL.to_vec(),
            seed: 0,
            workers: 0,
            out: PathBuf::from("out"),
            format: OutputFormat::Both,
            kmeans: KMeansConfig::default(),
            // Experiments tally the max-gap choice; `rule = "first-se-rule"`
            // under `[gap]` switches to the standard-error rule.
            gap: GapConfig {
                rule: GapRule::MaxGap,
                ..GapConfig::default()
            },
            jump: JumpConfig::default(),
            slope: SlopeConfig::default(),
            gmm: GmmConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.data.is_none() && self.scenarios.is_empty() {
            return Err(Error::Config("no scenarios and no dataset given".into()));
        }
        if self.data.is_none() {
            for s in &self.scenarios {
                s.spec()?;
            }
        }
        self.instability(SeedSpec::new(self.seed)).validate()?;
        self.gmm.validate()?;
        Ok(())
    }

    pub fn seed(&self) -> SeedSpec {
        SeedSpec::new(self.seed)
    }

    /// Instability settings with both normalizations computed.
    pub fn instability(&self, seed: SeedSpec) -> InstabilityConfig {
        InstabilityConfig {
            k_min: self.k_min,
            k_max: self.k_max,
            bootstrap_pairs: self.bootstraps,
            mode: Mode::ModelBased,
            normalize: true,
            kmeans: self.kmeans.clone(),
            seed,
        }
    }

    /// Methods in canonical order without duplicates.
    pub fn sorted_methods(&self) -> Vec<Method> {
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        m
    }

    /// The config as echoed next to the results.
    pub fn echo(&self) -> Result<serde_json::Value> {
        serde_json::to_value(self).map_err(|e| Error::Numerical(format!("config echo: {e}")))
    }
}
