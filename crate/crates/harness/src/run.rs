//! Training runs and their persisted outputs.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use wevo::{attach, CrossoverLevel, JsonlWriter, MatchStrategy, SelectionMode};
use wevo_nn::{checkpoint, train, TrainConfig, Trainer};

use crate::config::{RunConfig, WeConfig};
use crate::error::HarnessError;
use crate::registry::{build_model, load_dataset};

pub const CONFIG_FILE: &str = "config.toml";
pub const METRICS_FILE: &str = "metrics.jsonl";
pub const EVOLUTION_FILE: &str = "evolution.jsonl";
pub const RESULT_FILE: &str = "result.json";
pub const BEST_CHECKPOINT: &str = "best";
pub const FINAL_CHECKPOINT: &str = "final";

/// One line of `metrics.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub epoch: usize,
    pub split: String,
    pub loss: f32,
    pub acc: f32,
    /// Selection rate of the epoch; absent for baselines.
    pub r: Option<f64>,
    pub elements_changed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch: usize,
    pub lr: f32,
    pub train_loss: f32,
    pub train_acc: f32,
    pub test_loss: f32,
    pub test_acc: f32,
    pub r: Option<f64>,
    pub elements_changed: usize,
    pub evolved_filters: usize,
    pub train_ms: f64,
    pub hook_ms: f64,
}

/// Contents of `result.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub label: String,
    pub model: String,
    pub dataset: String,
    pub seed: u64,
    pub we_enabled: bool,
    pub alpha: String,
    /// Inference-mode loss on the training set before the first step.
    pub initial_train_loss: f32,
    /// Inference-mode loss on the training set after the last epoch.
    pub final_train_loss: f32,
    pub final_test_acc: f32,
    pub best_test_acc: f32,
    pub best_epoch: usize,
    pub total_elements_changed: usize,
    /// Epochs in which at least one element was evolved.
    pub evolving_epochs: usize,
    pub mean_train_ms: f64,
    pub mean_hook_ms: f64,
    /// Mean over epochs of `hook_ms / (train_ms + hook_ms)`.
    pub mean_overhead: f64,
    pub epochs: Vec<EpochSummary>,
    pub output_dir: PathBuf,
}

impl RunResult {
    pub fn load(dir: &Path) -> Result<Self, HarnessError> {
        let path = dir.join(RESULT_FILE);
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::io(&path, e))
    }
}

/// Short name of the variant, e.g. `baseline`, `we`, `we-rm-alpha0.3`.
pub fn variant_label(we: &WeConfig) -> String {
    if !we.enabled {
        return "baseline".into();
    }
    let mut parts = vec!["we".to_string()];
    match we.mode {
        SelectionMode::Full => {}
        SelectionMode::GlobalOnly => parts.push("g".into()),
        SelectionMode::LocalOnly => parts.push("l".into()),
    }
    if we.matching == MatchStrategy::Reverse {
        parts.push("rm".into());
    }
    if we.level == CrossoverLevel::Filter {
        parts.push("filter-level".into());
    }
    if let crate::config::AlphaSetting::Fixed(a) = we.alpha {
        parts.push(format!("alpha{a:.1}"));
    }
    if we.without_bn {
        parts.push("without-bn".into());
    }
    if we.without_conv {
        parts.push("without-conv".into());
    }
    if we.include_classifier {
        parts.push("with-fc".into());
    }
    parts.join("-")
}

/// Runs every repeat of `config`. With more than one repeat, repeat `k`
/// writes to `<output>/rep-<k>`.
pub fn run(config: &RunConfig) -> Result<Vec<RunResult>, HarnessError> {
    config.validate()?;
    let root = config.resolved_output_dir();
    (0..config.repeats)
        .map(|k| {
            let dir = if config.repeats == 1 {
                root.clone()
            } else {
                root.join(format!("rep-{k}"))
            };
            let mut single = config.clone();
            single.seed = config.seed + k as u64;
            single.repeats = 1;
            single.output_dir = dir.clone();
            run_single(&single, &dir)
        })
        .collect()
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Trains one model into `dir` and returns its result record.
pub fn run_single(config: &RunConfig, dir: &Path) -> Result<RunResult, HarnessError> {
    config.validate()?;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    write(&dir.join(CONFIG_FILE), &config.to_toml())?;
    for f in [METRICS_FILE, EVOLUTION_FILE] {
        let p = dir.join(f);
        if p.exists() {
            fs::remove_file(&p).map_err(|e| HarnessError::io(&p, e))?;
        }
    }
    let (train_set, test_set) = load_dataset(&config.dataset, &config.data, config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let net = build_model(&config.model, train_set.channels, train_set.classes, &mut rng)?;
    let o = &config.optimizer;
    let train_cfg = TrainConfig {
        batch_size: o.batch_size,
        lr: config.lr_schedule(),
        momentum: o.momentum as f32,
        weight_decay: o.weight_decay as f32,
        augment: config.data.augment,
    };
    let mut trainer = Trainer::new(net, train_cfg, config.seed.wrapping_add(1));
    let schedule = config.schedule::<f64>()?;
    if config.we.enabled {
        attach(&mut trainer.hooks, config.engine_config()?)?;
    }

    let mut metrics = JsonlWriter::append(dir.join(METRICS_FILE))?;
    let mut evolution = JsonlWriter::append(dir.join(EVOLUTION_FILE))?;
    let initial = trainer.evaluate(&train_set);
    metrics.write(&MetricRecord {
        epoch: 0,
        split: "train".into(),
        loss: initial.loss,
        acc: initial.acc,
        r: None,
        elements_changed: 0,
    })?;

    let mut epochs = Vec::with_capacity(o.epochs);
    let mut best = (f32::NEG_INFINITY, 0usize);
    for epoch in 1..=o.epochs {
        let out = trainer.run_epoch(epoch, &train_set, &test_set)?;
        let r = if config.we.enabled {
            Some(schedule.selection_rate(epoch)?)
        } else {
            None
        };
        let changed: usize = out.reports.iter().map(|r| r.total_elements_changed).sum();
        let filters: usize = out.reports.iter().map(|r| r.total_inferior).sum();
        for rep in &out.reports {
            evolution.write(rep)?;
        }
        for (split, ev) in [("train", out.train), ("test", out.test)] {
            metrics.write(&MetricRecord {
                epoch,
                split: split.into(),
                loss: ev.loss,
                acc: ev.acc,
                r,
                elements_changed: changed,
            })?;
        }
        if out.test.acc > best.0 {
            best = (out.test.acc, epoch);
            checkpoint::save(&trainer.net, config.seed, epoch, dir, BEST_CHECKPOINT)?;
        }
        if config.checkpoint_epochs.contains(&epoch) {
            checkpoint::save(&trainer.net, config.seed, epoch, dir, &format!("epoch-{epoch}"))?;
        }
        epochs.push(EpochSummary {
            epoch,
            lr: out.lr,
            train_loss: out.train.loss,
            train_acc: out.train.acc,
            test_loss: out.test.loss,
            test_acc: out.test.acc,
            r,
            elements_changed: changed,
            evolved_filters: filters,
            train_ms: out.train_ms,
            hook_ms: out.hook_ms,
        });
    }
    checkpoint::save(&trainer.net, config.seed, o.epochs, dir, FINAL_CHECKPOINT)?;
    let final_train = train::evaluate(&mut trainer.net, &train_set, o.batch_size);

    let n = epochs.len() as f64;
    let last = epochs.last().expect("at least one epoch");
    let result = RunResult {
        label: variant_label(&config.we),
        model: config.model.clone(),
        dataset: config.dataset.clone(),
        seed: config.seed,
        we_enabled: config.we.enabled,
        alpha: config.we.alpha.to_string(),
        initial_train_loss: initial.loss,
        final_train_loss: final_train.loss,
        final_test_acc: last.test_acc,
        best_test_acc: best.0,
        best_epoch: best.1,
        total_elements_changed: epochs.iter().map(|e| e.elements_changed).sum(),
        evolving_epochs: epochs.iter().filter(|e| e.elements_changed > 0).count(),
        mean_train_ms: epochs.iter().map(|e| e.train_ms).sum::<f64>() / n,
        mean_hook_ms: epochs.iter().map(|e| e.hook_ms).sum::<f64>() / n,
        mean_overhead: epochs.iter().map(|e| e.hook_ms / (e.train_ms + e.hook_ms)).sum::<f64>() / n,
        epochs,
        output_dir: dir.to_path_buf(),
    };
    let json = serde_json::to_string_pretty(&result).expect("results always serialize");
    write(&dir.join(RESULT_FILE), &json)?;
    Ok(result)
}
