//! In-memory image classification datasets.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::tensor::Tensor;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("io error reading {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed dataset file {path}: {reason}")]
    Malformed { path: String, reason: String },
    #[error("cannot take {requested} images per class from {available}")]
    TooFewImages { requested: usize, available: usize },
}

/// Images stored sample-major in CHW order.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub classes: usize,
    pub images: Vec<f32>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample_len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn image(&self, i: usize) -> &[f32] {
        let n = self.sample_len();
        &self.images[i * n..(i + 1) * n]
    }

    /// Gathers `indices` into one batch. With `augment`, each image is
    /// randomly cropped from a 4-pixel zero padding and flipped
    /// horizontally with probability one half.
    pub fn batch<R: Rng>(&self, indices: &[usize], augment: bool, rng: &mut R) -> (Tensor, Vec<usize>) {
        let (c, h, w) = (self.channels, self.height, self.width);
        let mut out = Tensor::zeros(indices.len(), c, h, w);
        let n = self.sample_len();
        for (b, &i) in indices.iter().enumerate() {
            let src = self.image(i);
            let dst = &mut out.data[b * n..(b + 1) * n];
            if !augment {
                dst.copy_from_slice(src);
                continue;
            }
            let dy = rng.gen_range(-4i64..=4);
            let dx = rng.gen_range(-4i64..=4);
            let flip = rng.gen_bool(0.5);
            for ch in 0..c {
                for y in 0..h {
                    let sy = y as i64 + dy;
                    if sy < 0 || sy >= h as i64 {
                        continue;
                    }
                    for x in 0..w {
                        let xx = if flip { w - 1 - x } else { x };
                        let sx = xx as i64 + dx;
                        if sx < 0 || sx >= w as i64 {
                            continue;
                        }
                        dst[(ch * h + y) * w + x] = src[(ch * h + sy as usize) * w + sx as usize];
                    }
                }
            }
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        (out, labels)
    }

    /// Shuffled mini-batch index lists covering every sample once.
    pub fn epoch_batches<R: Rng>(&self, batch_size: usize, rng: &mut R) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(rng);
        order.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect()
    }

    /// The first `per_class` images of every class, in original order.
    pub fn class_balanced(&self, per_class: usize) -> Result<Dataset, DataError> {
        let mut taken = vec![0usize; self.classes];
        let mut images = Vec::with_capacity(per_class * self.classes * self.sample_len());
        let mut labels = Vec::with_capacity(per_class * self.classes);
        for i in 0..self.len() {
            let y = self.labels[i];
            if taken[y] < per_class {
                taken[y] += 1;
                images.extend_from_slice(self.image(i));
                labels.push(y);
            }
        }
        if let Some(&short) = taken.iter().min().filter(|&&m| m < per_class) {
            return Err(DataError::TooFewImages {
                requested: per_class,
                available: short,
            });
        }
        Ok(Dataset {
            images,
            labels,
            ..self.clone_header()
        })
    }

    fn clone_header(&self) -> Dataset {
        Dataset {
            channels: self.channels,
            height: self.height,
            width: self.width,
            classes: self.classes,
            images: Vec::new(),
            labels: Vec::new(),
        }
    }
}

/// Two-class 3×12×12 gratings: class 0 is horizontal stripes, class 1
/// vertical, each with random frequency, phase and colour weights plus
/// Gaussian pixel noise.
pub fn synthetic_two_class(count: usize, noise: f32, seed: u64) -> Dataset {
    const C: usize = 3;
    const S: usize = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0f32, noise.max(0.0)).expect("non-negative noise");
    let mut images = Vec::with_capacity(count * C * S * S);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let label = i % 2;
        let freq = rng.gen_range(0.5f32..1.5);
        let phase = rng.gen_range(0.0f32..std::f32::consts::TAU);
        let colour: [f32; C] = [rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0)];
        for &amp in &colour {
            for y in 0..S {
                for x in 0..S {
                    let t = if label == 0 { y } else { x } as f32;
                    images.push(amp * (freq * t + phase).sin() + normal.sample(&mut rng));
                }
            }
        }
        labels.push(label);
    }
    Dataset {
        channels: C,
        height: S,
        width: S,
        classes: 2,
        images,
        labels,
    }
}

const CIFAR_MEAN: [f32; 3] = [0.4914, 0.4822, 0.4465];
const CIFAR_STD: [f32; 3] = [0.2470, 0.2435, 0.2616];
const CIFAR_PIXELS: usize = 3 * 32 * 32;

fn read(path: &Path) -> Result<Vec<u8>, DataError> {
    fs::read(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Parses CIFAR binary records: `label_bytes` bytes of labels, the last of
/// which is used, followed by 3072 channel-major pixels.
fn parse_cifar(files: &[std::path::PathBuf], label_bytes: usize, classes: usize) -> Result<Dataset, DataError> {
    let record = label_bytes + CIFAR_PIXELS;
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for path in files {
        let bytes = read(path)?;
        if bytes.is_empty() || bytes.len() % record != 0 {
            return Err(DataError::Malformed {
                path: path.display().to_string(),
                reason: format!("length {} is not a multiple of {record}", bytes.len()),
            });
        }
        for rec in bytes.chunks_exact(record) {
            let label = rec[label_bytes - 1] as usize;
            if label >= classes {
                return Err(DataError::Malformed {
                    path: path.display().to_string(),
                    reason: format!("label {label} out of range"),
                });
            }
            labels.push(label);
            for (i, &px) in rec[label_bytes..].iter().enumerate() {
                let ch = i / 1024;
                images.push((px as f32 / 255.0 - CIFAR_MEAN[ch]) / CIFAR_STD[ch]);
            }
        }
    }
    Ok(Dataset {
        channels: 3,
        height: 32,
        width: 32,
        classes,
        images,
        labels,
    })
}

/// CIFAR-10 from the binary distribution directory
/// (`data_batch_{1..5}.bin`, `test_batch.bin`). Returns `(train, test)`.
pub fn load_cifar10(dir: &Path) -> Result<(Dataset, Dataset), DataError> {
    let train: Vec<_> = (1..=5).map(|i| dir.join(format!("data_batch_{i}.bin"))).collect();
    Ok((parse_cifar(&train, 1, 10)?, parse_cifar(&[dir.join("test_batch.bin")], 1, 10)?))
}

/// CIFAR-100 fine labels from the binary distribution directory
/// (`train.bin`, `test.bin`). Returns `(train, test)`.
pub fn load_cifar100(dir: &Path) -> Result<(Dataset, Dataset), DataError> {
    Ok((
        parse_cifar(&[dir.join("train.bin")], 2, 100)?,
        parse_cifar(&[dir.join("test.bin")], 2, 100)?,
    ))
}
