#![allow(dead_code)]

use wevo::{
    DenseStore, EngineConfig, LayerFamily, LayerKind, ParameterStore, Result, SelectionConfig,
    SelectionMode, StageSchedule, WeError,
};
use wevo_oracle::{OracleConfig, OracleMode, ToyKind, ToyNetwork};

pub fn to_store(toy: &ToyNetwork) -> DenseStore<f64> {
    let mut store = DenseStore::new();
    for (i, l) in toy.layers.iter().enumerate() {
        let (kind, family) = match l.kind {
            ToyKind::Ordinary => (LayerKind::OrdinaryConv, LayerFamily::Conv),
            ToyKind::Depthwise => (LayerKind::DepthwiseConv, LayerFamily::Conv),
            ToyKind::Pointwise => (LayerKind::PointwiseConv, LayerFamily::Conv),
            ToyKind::Grouped => (LayerKind::GroupedConv, LayerFamily::Conv),
            ToyKind::BnScale => (LayerKind::BnScale, LayerFamily::BatchNorm),
            ToyKind::Bias => (LayerKind::Bias, LayerFamily::BatchNorm),
        };
        let values = l.filters.iter().flatten().copied().collect();
        store
            .push(format!("toy{i}"), kind, family, l.filter_count(), l.in_channels, l.kernel, l.groups, values)
            .unwrap();
    }
    store
}

pub const STAGES: [usize; 3] = [1, 61, 121];

pub fn oracle_config(r_hat: f64, gamma: f64, mode: OracleMode) -> OracleConfig {
    OracleConfig { r_hat, beta: 2.5, eta: 15.0, stage_starts: STAGES.to_vec(), gamma, mode }
}

pub fn engine_config(r_hat: f64, gamma: f64, mode: OracleMode) -> EngineConfig<f64> {
    let sched = StageSchedule::new(200, STAGES.to_vec(), r_hat, 2.5, 15.0).unwrap();
    let mode = match mode {
        OracleMode::Full => SelectionMode::Full,
        OracleMode::GlobalOnly => SelectionMode::GlobalOnly,
        OracleMode::LocalOnly => SelectionMode::LocalOnly,
    };
    EngineConfig::new(SelectionConfig::new(sched, gamma, mode).unwrap())
}

/// Store wrapper whose `fail_at`-th mutable access fails.
pub struct FailingStore<'a> {
    pub inner: &'a mut DenseStore<f64>,
    pub fail_at: usize,
    pub calls: usize,
}

impl ParameterStore<f64> for FailingStore<'_> {
    fn layers(&self) -> &[wevo::LayerSpec] {
        self.inner.layers()
    }

    fn filter(&self, layer_id: usize, filter_index: usize) -> Result<&[f64]> {
        self.inner.filter(layer_id, filter_index)
    }

    fn filter_mut(&mut self, layer_id: usize, filter_index: usize) -> Result<&mut [f64]> {
        self.calls += 1;
        if self.calls == self.fail_at {
            return Err(WeError::Store("injected failure".into()));
        }
        self.inner.filter_mut(layer_id, filter_index)
    }
}

pub fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}
