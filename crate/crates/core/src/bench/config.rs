use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{DatasetSpec, Task};
use crate::error::{Error, Result};
use crate::models::{ModelOverrides, ModelSpec};
use crate::noise::NoiseModel;
use crate::optim::{OptimizerConfig, PruningConfig, PruningMode};

pub const DATA_ROOT_ENV: &str = "QNN_DATA_ROOT";
pub const DEFAULT_DATA_ROOT: &str = "data";

/// The three training settings compared in the accuracy table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Noise-free simulation, no pruning.
    Classical,
    /// Noisy execution, no pruning.
    Qc,
    /// Noisy execution with gradient pruning.
    QcPgp,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub preset: Option<String>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub readout_flip: Option<f64>,
    pub shots: Option<u32>,
    /// Read exact expectations instead of sampling shots.
    pub exact_readout: Option<bool>,
    pub trajectories: Option<u32>,
    pub enabled: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruningSection {
    pub mode: Option<PruningMode>,
    pub ratio: Option<f64>,
    pub accumulation_window: Option<u32>,
    pub pruning_window: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    /// Sets the noise preset and disables pruning for `classical` and `qc`.
    pub mode: Option<RunMode>,
    /// Training steps; defaults to the task's calibrated value.
    pub steps: Option<u64>,
    /// Alternative to `steps`: train until this many circuit executions
    /// would be exceeded.
    pub circuit_budget: Option<u64>,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_eval_every")]
    pub eval_every: u64,
    /// Seed of the validation draw.
    #[serde(default)]
    pub split_seed: u64,
    pub output_dir: Option<PathBuf>,
    pub data_root: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelOverrides,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub pruning: PruningSection,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

fn default_batch() -> usize {
    32
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_eval_every() -> u64 {
    25
}

/// Steps per task used when a config gives neither `steps` nor
/// `circuit_budget`.
pub fn default_steps(task: Task) -> u64 {
    match task {
        Task::Mnist2 | Task::Fashion2 => 150,
        Task::Mnist4 | Task::Fashion4 => 300,
        Task::Vowel4 => 300,
    }
}

impl ExperimentConfig {
    pub fn new(task: Task) -> Self {
        ExperimentConfig {
            task,
            mode: None,
            steps: None,
            circuit_budget: None,
            batch_size: default_batch(),
            seeds: default_seeds(),
            eval_every: default_eval_every(),
            split_seed: 0,
            output_dir: None,
            data_root: None,
            model: ModelOverrides::default(),
            noise: NoiseSection::default(),
            pruning: PruningSection::default(),
            optimizer: OptimizerConfig::default(),
        }
    }

    pub fn with_mode(mut self, mode: RunMode) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses `text`, then applies dotted `key=value` overrides; values are
    /// read as TOML literals and fall back to plain strings.
    pub fn from_toml_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text.parse()?;
        for (key, value) in overrides {
            set_path(&mut table, key, parse_value(value))?;
        }
        let config: ExperimentConfig = table.try_into()?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// SHA-256 of the canonical TOML form, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.steps == Some(0) {
            return Err(Error::Config("steps must be >= 1".into()));
        }
        if self.steps.is_some() && self.circuit_budget.is_some() {
            return Err(Error::Config("set either steps or circuit_budget, not both".into()));
        }
        self.model_spec()?;
        self.noise_model()?.validate()?;
        self.pruning_config()?.validate()?;
        self.optimizer.validate()
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        DatasetSpec {
            seed: self.split_seed,
            ..DatasetSpec::preset(self.task)
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        ModelSpec::preset(self.task).with_overrides(&self.model)
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let s = &self.noise;
        let base = match (&s.preset, self.mode) {
            (Some(name), _) => name.as_str(),
            (None, Some(RunMode::Qc | RunMode::QcPgp)) => "default",
            (None, _) => "none",
        };
        let mut m = NoiseModel::preset(base)?;
        if self.mode == Some(RunMode::Classical) {
            return Ok(NoiseModel::none());
        }
        if let Some(v) = s.p1 {
            m.p1 = v;
        }
        if let Some(v) = s.p2 {
            m.p2 = v;
        }
        if let Some(v) = s.readout_flip {
            m.readout_flip = v;
        }
        if let Some(v) = s.shots {
            m.shots = Some(v);
        }
        if s.exact_readout == Some(true) {
            m.shots = None;
        }
        if let Some(v) = s.trajectories {
            m.trajectories = v;
        }
        if let Some(v) = s.enabled {
            m.enabled = v;
        }
        Ok(m)
    }

    pub fn pruning_config(&self) -> Result<PruningConfig> {
        let s = &self.pruning;
        let mut p = PruningConfig::default();
        if self.task == Task::Fashion4 {
            p.ratio = 0.7;
        }
        if let Some(v) = s.mode {
            p.mode = v;
        }
        if let Some(v) = s.ratio {
            p.ratio = v;
        }
        if let Some(v) = s.accumulation_window {
            p.accumulation_window = v;
        }
        if let Some(v) = s.pruning_window {
            p.pruning_window = v;
        }
        match self.mode {
            Some(RunMode::Classical | RunMode::Qc) => p.mode = PruningMode::Off,
            Some(RunMode::QcPgp) if p.mode == PruningMode::Off => {
                return Err(Error::Config("mode qc_pgp needs a pruning mode other than off".into()))
            }
            _ => {}
        }
        Ok(p)
    }

    /// Config value, then `QNN_DATA_ROOT`, then `./data`.
    pub fn data_root(&self) -> PathBuf {
        self.data_root
            .clone()
            .or_else(|| std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_ROOT))
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| Error::Config(format!("bad override key `{key}`")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
