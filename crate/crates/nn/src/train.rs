use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use wevo::{EvolutionReport, HookRegistry};

use crate::data::Dataset;
use crate::network::Network;
use crate::optim::{softmax_cross_entropy, MultiStepLr, Sgd};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr: MultiStepLr,
    pub momentum: f32,
    pub weight_decay: f32,
    pub augment: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub loss: f32,
    pub acc: f32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochOutcome {
    pub epoch: usize,
    pub lr: f32,
    pub train: Evaluation,
    pub test: Evaluation,
    /// Optimisation time for the epoch, excluding hooks and evaluation.
    pub train_ms: f64,
    /// Time spent in end-of-epoch hooks.
    pub hook_ms: f64,
    pub reports: Vec<EvolutionReport>,
}

/// Mini-batch SGD loop with end-of-epoch hooks. Hooks fire after the last
/// optimiser step of an epoch and before evaluation.
pub struct Trainer {
    pub net: Network,
    pub hooks: HookRegistry<f32>,
    config: TrainConfig,
    opt: Sgd,
    rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(net: Network, config: TrainConfig, seed: u64) -> Self {
        let opt = Sgd::new(config.momentum, config.weight_decay);
        Trainer {
            net,
            hooks: HookRegistry::new(),
            config,
            opt,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn run_epoch(&mut self, epoch: usize, train: &Dataset, test: &Dataset) -> wevo::Result<EpochOutcome> {
        let lr = self.config.lr.lr_at(epoch);
        let start = Instant::now();
        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for idx in train.epoch_batches(self.config.batch_size, &mut self.rng) {
            let (x, y) = train.batch(&idx, self.config.augment, &mut self.rng);
            self.net.zero_grad();
            let logits = self.net.forward(x, true);
            let (loss, grad, hits) = softmax_cross_entropy(&logits.data, logits.c, &y);
            loss_sum += f64::from(loss) * y.len() as f64;
            correct += hits;
            self.net.backward(crate::tensor::Tensor::from_vec(logits.n, logits.c, 1, 1, grad));
            self.opt.step(self.net.params_mut(), lr);
        }
        let train_ms = start.elapsed().as_secs_f64() * 1e3;
        let hook_start = Instant::now();
        let reports = self.hooks.fire_epoch_end(epoch, &mut self.net)?;
        let hook_ms = hook_start.elapsed().as_secs_f64() * 1e3;
        let n = train.len().max(1) as f64;
        Ok(EpochOutcome {
            epoch,
            lr,
            train: Evaluation {
                loss: (loss_sum / n) as f32,
                acc: (correct as f64 / n) as f32,
            },
            test: self.evaluate(test),
            train_ms,
            hook_ms,
            reports,
        })
    }

    /// Inference-mode loss and accuracy over `data`.
    pub fn evaluate(&mut self, data: &Dataset) -> Evaluation {
        evaluate(&mut self.net, data, self.config.batch_size)
    }
}

pub fn evaluate(net: &mut Network, data: &Dataset, batch_size: usize) -> Evaluation {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut loss_sum = 0.0f64;
    let mut correct = 0usize;
    let all: Vec<usize> = (0..data.len()).collect();
    for idx in all.chunks(batch_size.max(1)) {
        let (x, y) = data.batch(idx, false, &mut rng);
        let logits = net.forward(x, false);
        let (loss, _, hits) = softmax_cross_entropy(&logits.data, logits.c, &y);
        loss_sum += f64::from(loss) * y.len() as f64;
        correct += hits;
    }
    let n = data.len().max(1) as f64;
    Evaluation {
        loss: (loss_sum / n) as f32,
        acc: (correct as f64 / n) as f32,
    }
}
