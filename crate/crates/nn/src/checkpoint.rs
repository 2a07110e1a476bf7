//! Checkpoints: raw little-endian `f32` parameters and buffers plus a JSON
//! manifest describing the layers.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wevo::{LayerSpec, ParameterStore};

use crate::network::Network;
use crate::param::ParamRole;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("checkpoint does not match network: {0}")]
    Mismatch(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    /// Offset into the value file, in `f32` elements.
    pub offset: usize,
    pub len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<ParamRole>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub epoch: usize,
    pub layers: Vec<LayerSpec>,
    pub params: Vec<TensorEntry>,
    pub buffers: Vec<TensorEntry>,
}

fn io(path: &Path, e: std::io::Error) -> CheckpointError {
    CheckpointError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes `<stem>.bin` and `<stem>.json` into `dir`.
pub fn save(net: &Network, seed: u64, epoch: usize, dir: &Path, stem: &str) -> Result<Manifest, CheckpointError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut bytes = Vec::with_capacity(4 * net.param_count());
    let mut offset = 0;
    let mut push = |name: &str, values: &[f32], role: Option<ParamRole>| {
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let e = TensorEntry {
            name: name.to_string(),
            offset,
            len: values.len(),
            role,
        };
        offset += values.len();
        e
    };
    let params = net.params().iter().map(|p| push(&p.name, &p.value, Some(p.role))).collect();
    let buffers = net.buffers().iter().map(|b| push(&b.name, &b.value, None)).collect();
    let manifest = Manifest {
        seed,
        epoch,
        layers: net.layers().to_vec(),
        params,
        buffers,
    };
    let bin = dir.join(format!("{stem}.bin"));
    fs::write(&bin, &bytes).map_err(|e| io(&bin, e))?;
    let json = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CheckpointError::Manifest(e.to_string()))?;
    fs::write(&json, text).map_err(|e| io(&json, e))?;
    Ok(manifest)
}

/// Reads a manifest and the flat value array it indexes.
pub fn read(dir: &Path, stem: &str) -> Result<(Manifest, Vec<f32>), CheckpointError> {
    let json = dir.join(format!("{stem}.json"));
    let text = fs::read_to_string(&json).map_err(|e| io(&json, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| CheckpointError::Manifest(e.to_string()))?;
    let bin = dir.join(format!("{stem}.bin"));
    let bytes = fs::read(&bin).map_err(|e| io(&bin, e))?;
    if bytes.len() % 4 != 0 {
        return Err(CheckpointError::Manifest(format!("{} has a partial value", bin.display())));
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let end = manifest
        .params
        .iter()
        .chain(&manifest.buffers)
        .map(|e| e.offset + e.len)
        .max()
        .unwrap_or(0);
    if end > values.len() {
        return Err(CheckpointError::Manifest("value file shorter than manifest".into()));
    }
    Ok((manifest, values))
}

/// Restores parameters and buffers into a network of identical layout.
pub fn load_into(net: &mut Network, dir: &Path, stem: &str) -> Result<Manifest, CheckpointError> {
    let (manifest, values) = read(dir, stem)?;
    if manifest.params.len() != net.params().len() || manifest.buffers.len() != net.buffers().len() {
        return Err(CheckpointError::Mismatch("tensor counts differ".into()));
    }
    for (p, e) in net.params_mut().iter_mut().zip(&manifest.params) {
        if p.value.len() != e.len || p.name != e.name {
            return Err(CheckpointError::Mismatch(format!("parameter {}", e.name)));
        }
        p.value.copy_from_slice(&values[e.offset..e.offset + e.len]);
    }
    for (b, e) in net.buffers_mut().iter_mut().zip(&manifest.buffers) {
        if b.value.len() != e.len || b.name != e.name {
            return Err(CheckpointError::Mismatch(format!("buffer {}", e.name)));
        }
        b.value.copy_from_slice(&values[e.offset..e.offset + e.len]);
    }
    Ok(manifest)
}
