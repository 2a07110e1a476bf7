//! Per-epoch evolution records and their line-delimited JSON encoding.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WeError};
use crate::model::{LayerFamily, LayerKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub layer_id: usize,
    pub name: String,
    pub kind: LayerKind,
    pub family: LayerFamily,
    /// Inferior filters evolved in this layer (summed over groups).
    pub inferior: usize,
    pub elements_changed: usize,
    /// `(inferior, dominant)` filter pairs, group by group.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub epoch: usize,
    pub stage: usize,
    pub selection_rate: f64,
    pub tbd_count: usize,
    pub layers: Vec<LayerReport>,
    pub total_inferior: usize,
    pub total_elements_changed: usize,
    pub wall_time_ms: f64,
}

impl EvolutionReport {
    pub fn layer(&self, layer_id: usize) -> Option<&LayerReport> {
        self.layers.iter().find(|l| l.layer_id == layer_id)
    }

    /// True when the totals equal the per-layer sums.
    pub fn is_consistent(&self) -> bool {
        self.total_inferior == self.layers.iter().map(|l| l.inferior).sum::<usize>()
            && self.total_elements_changed
                == self.layers.iter().map(|l| l.elements_changed).sum::<usize>()
    }
}

/// Appends one JSON object per line.
pub struct JsonlWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl JsonlWriter {
    pub fn append(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| WeError::Io(format!("{}: {e}", path.display())))?;
        Ok(JsonlWriter {
            path,
            out: BufWriter::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<()> {
        let line = serde_json::to_string(record).map_err(|e| WeError::Io(e.to_string()))?;
        writeln!(self.out, "{line}").map_err(|e| WeError::Io(e.to_string()))?;
        self.out.flush().map_err(|e| WeError::Io(e.to_string()))
    }
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| WeError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| WeError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| WeError::Io(format!("{}:{}: {e}", path.display(), n + 1)))?,
        );
    }
    Ok(out)
}
