//! Model and dataset registries.

use rand::Rng;
use wevo_nn::data::{load_cifar10, load_cifar100, synthetic_two_class};
use wevo_nn::models::{mobilenet_style, resnet20, toy_cnn};
use wevo_nn::{Dataset, Network};

use crate::config::DataConfig;
use crate::error::HarnessError;

pub const MODELS: &[&str] = &["toy-cnn", "resnet20-cifar", "mobilenet-style"];
pub const DATASETS: &[&str] = &["synthetic-2class", "reduced-image-set", "cifar10", "cifar100"];

pub fn check_keys(model: &str, dataset: &str) -> Result<(), HarnessError> {
    if !MODELS.contains(&model) {
        return Err(HarnessError::UnknownModel(model.to_string()));
    }
    if !DATASETS.contains(&dataset) {
        return Err(HarnessError::UnknownDataset(dataset.to_string()));
    }
    Ok(())
}

pub fn build_model<R: Rng>(id: &str, in_channels: usize, classes: usize, rng: &mut R) -> Result<Network, HarnessError> {
    match id {
        "toy-cnn" => Ok(toy_cnn(in_channels, classes, rng)),
        "resnet20-cifar" => Ok(resnet20(in_channels, classes, rng)),
        "mobilenet-style" => Ok(mobilenet_style(in_channels, classes, rng)),
        _ => Err(HarnessError::UnknownModel(id.to_string())),
    }
}

fn root(cfg: &DataConfig, id: &str) -> Result<std::path::PathBuf, HarnessError> {
    cfg.root
        .clone()
        .ok_or_else(|| HarnessError::Config(format!("dataset {id} needs data.root pointing at the binary files")))
}

/// Returns `(train, test)`.
///
/// `reduced-image-set` is a class-balanced subsample of the CIFAR-10
/// training set (`data.per_class` images per class) evaluated on the full
/// CIFAR-10 test set.
pub fn load_dataset(id: &str, cfg: &DataConfig, seed: u64) -> Result<(Dataset, Dataset), HarnessError> {
    match id {
        "synthetic-2class" => Ok((
            synthetic_two_class(cfg.train_size, cfg.noise as f32, seed),
            synthetic_two_class(cfg.test_size, cfg.noise as f32, seed ^ 0x5eed_7e57),
        )),
        "reduced-image-set" => {
            let (train, test) = load_cifar10(&root(cfg, id)?)?;
            Ok((train.class_balanced(cfg.per_class)?, test))
        }
        "cifar10" => Ok(load_cifar10(&root(cfg, id)?)?),
        "cifar100" => Ok(load_cifar100(&root(cfg, id)?)?),
        _ => Err(HarnessError::UnknownDataset(id.to_string())),
    }
}
