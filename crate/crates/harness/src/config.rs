//! Run configuration, stored as TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wevo::{
    AlphaMode, CrossoverConfig, CrossoverLevel, EngineConfig, LayerOptIn, MatchStrategy, SelectionConfig,
    SelectionMode, StageSchedule,
};

use crate::error::HarnessError;

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "WEVO_OUTPUT_ROOT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Registry key of the model, e.g. `toy-cnn`.
    pub model: String,
    /// Registry key of the dataset, e.g. `synthetic-2class`.
    pub dataset: String,
    pub seed: u64,
    /// Independent repetitions with seeds `seed, seed + 1, ...`.
    #[serde(default = "one")]
    pub repeats: usize,
    pub output_dir: PathBuf,
    /// Extra epochs at which to save a parameter snapshot.
    #[serde(default)]
    pub checkpoint_epochs: Vec<usize>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub we: WeConfig,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Directory of the CIFAR binary files, for datasets that need them.
    pub root: Option<PathBuf>,
    /// Synthetic training / test set sizes.
    pub train_size: usize,
    pub test_size: usize,
    /// Pixel noise standard deviation of the synthetic data.
    pub noise: f64,
    /// Training images per class of the reduced image set.
    pub per_class: usize,
    /// Random crop and horizontal flip on training batches.
    pub augment: bool,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            root: None,
            train_size: 512,
            test_size: 256,
            noise: 0.5,
            per_class: 500,
            augment: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LrSchedule {
    Step,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub batch_size: usize,
    pub momentum: f64,
    pub weight_decay: f64,
    pub lr: f64,
    pub lr_schedule: LrSchedule,
    /// Epochs after which the learning rate is multiplied by `lr_decay`.
    pub milestones: Vec<usize>,
    pub lr_decay: f64,
    pub epochs: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            batch_size: 128,
            momentum: 0.9,
            weight_decay: 5e-4,
            lr: 0.1,
            lr_schedule: LrSchedule::Step,
            milestones: vec![60, 120],
            lr_decay: 0.1,
            epochs: 200,
        }
    }
}

/// `"adaptive"` or a fixed coefficient in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaSetting {
    Adaptive,
    Fixed(f64),
}

impl Serialize for AlphaSetting {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        match self {
            AlphaSetting::Adaptive => s.serialize_str("adaptive"),
            AlphaSetting::Fixed(a) => s.serialize_f64(*a),
        }
    }
}

impl<'de> Deserialize<'de> for AlphaSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(AlphaSetting::Fixed(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for AlphaSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("adaptive") {
            return Ok(AlphaSetting::Adaptive);
        }
        s.parse::<f64>()
            .map(AlphaSetting::Fixed)
            .map_err(|_| format!("alpha must be \"adaptive\" or a number, got {s:?}"))
    }
}

impl std::fmt::Display for AlphaSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlphaSetting::Adaptive => f.write_str("adaptive"),
            AlphaSetting::Fixed(a) => write!(f, "{a:.1}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeConfig {
    /// `false` trains the plain-SGD baseline.
    pub enabled: bool,
    pub mode: SelectionMode,
    pub matching: MatchStrategy,
    pub alpha: AlphaSetting,
    pub level: CrossoverLevel,
    pub without_bn: bool,
    pub without_conv: bool,
    pub include_classifier: bool,
    pub r_hat: f64,
    pub beta: f64,
    pub eta: f64,
    pub gamma: f64,
    pub interval: usize,
}

impl Default for WeConfig {
    fn default() -> Self {
        WeConfig {
            enabled: true,
            mode: SelectionMode::Full,
            matching: MatchStrategy::Forward,
            alpha: AlphaSetting::Adaptive,
            level: CrossoverLevel::Element,
            without_bn: false,
            without_conv: false,
            include_classifier: false,
            r_hat: 0.05,
            beta: 2.5,
            eta: 15.0,
            gamma: 0.05,
            interval: 1,
        }
    }
}

impl RunConfig {
    pub fn new(model: impl Into<String>, dataset: impl Into<String>, output_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            model: model.into(),
            dataset: dataset.into(),
            seed: 0,
            repeats: 1,
            output_dir: output_dir.into(),
            checkpoint_epochs: Vec::new(),
            data: DataConfig::default(),
            optimizer: OptimizerConfig::default(),
            we: WeConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Canonical serialization; parsing it yields an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs always serialize")
    }

    /// Output directory, placed under `$WEVO_OUTPUT_ROOT` when that is set
    /// and the configured path is relative.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if self.output_dir.is_relative() => PathBuf::from(root).join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }

    pub fn lr_schedule(&self) -> wevo_nn::MultiStepLr {
        wevo_nn::MultiStepLr {
            base: self.optimizer.lr as f32,
            milestones: self.optimizer.milestones.clone(),
            gamma: self.optimizer.lr_decay as f32,
        }
    }

    pub fn schedule<S: wevo::Scalar>(&self) -> Result<StageSchedule<S>, HarnessError> {
        let o = &self.optimizer;
        Ok(StageSchedule::from_milestones(
            o.epochs,
            &o.milestones,
            S::lit(self.we.r_hat),
            S::lit(self.we.beta),
            S::lit(self.we.eta),
        )?)
    }

    pub fn engine_config(&self) -> Result<EngineConfig<f32>, HarnessError> {
        let we = &self.we;
        let selection = SelectionConfig::new(self.schedule()?, we.gamma as f32, we.mode)?;
        let mut cfg = EngineConfig::new(selection);
        cfg.crossover = CrossoverConfig {
            alpha: match we.alpha {
                AlphaSetting::Adaptive => AlphaMode::Adaptive,
                AlphaSetting::Fixed(a) => AlphaMode::Fixed(a as f32),
            },
            level: we.level,
        };
        cfg.matching = we.matching;
        cfg.update_interval = we.interval;
        cfg.opt_in = LayerOptIn {
            conv: !we.without_conv,
            batch_norm: !we.without_bn,
            classifier: we.include_classifier,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without touching data.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let o = &self.optimizer;
        if o.epochs == 0 || o.batch_size == 0 {
            return Err(HarnessError::Config("epochs and batch_size must be positive".into()));
        }
        if self.repeats == 0 {
            return Err(HarnessError::Config("repeats must be positive".into()));
        }
        if !(o.lr > 0.0) || !(o.momentum >= 0.0) || !(o.weight_decay >= 0.0) {
            return Err(HarnessError::Config("lr must be positive, momentum and weight_decay non-negative".into()));
        }
        if let Some(&e) = self.checkpoint_epochs.iter().find(|&&e| e == 0 || e > o.epochs) {
            return Err(HarnessError::Config(format!("checkpoint epoch {e} outside 1..={}", o.epochs)));
        }
        // Stage boundaries come from the milestones whether or not WE runs.
        let schedule = self.schedule::<f64>()?;
        if *schedule.stage_starts().last().unwrap_or(&1) > o.epochs {
            return Err(HarnessError::Config("milestones must precede the last epoch".into()));
        }
        if self.we.enabled {
            self.engine_config()?;
        }
        crate::registry::check_keys(&self.model, &self.dataset)
    }
}
