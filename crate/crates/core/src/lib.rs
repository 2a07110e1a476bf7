//! Weight evolution for convolutional networks.
//!
//! After each training epoch the filters with the smallest average ℓ1 norm
//! network-wide are shortlisted, kept only if they are also weak relative
//! to the strongest filter of their own layer, and then each one inherits
//! genes from a dominant filter of the same layer: per input-channel slice,
//! its weakest element is blended with the donor slice's strongest element.
//!
//! The crate is framework-agnostic. A host exposes its parameters through
//! [`ParameterStore`] and calls an [`Engine`] between epochs, directly or via a
//! [`HookRegistry`]. All numerics are generic over [`Scalar`] (`f32`, `f64`).

pub mod engine;
pub mod error;
pub mod evolve;
pub mod hooks;
pub mod metrics;
pub mod model;
pub mod report;
pub mod scalar;
pub mod schedule;
pub mod selection;

pub use engine::{apply_plan, ElementWrite, Engine, EngineConfig, EvolutionPlan, LayerPlan};
pub use error::{Result, WeError};
pub use evolve::{
    alpha_sweep_values, crossover_filter, crossover_slice, match_filters, AlphaMode,
    CrossoverConfig, CrossoverLevel, MatchPlan, MatchStrategy,
};
pub use hooks::{attach, EpochHook, HookHandle, HookRegistry};
pub use metrics::{avg_l1_norm, relative_importance, score_snapshot, FilterScore};
pub use model::{
    enumerate_filters, group_of, DenseStore, FilterKey, FilterView, FilterViewMut, LayerFamily,
    LayerKind, LayerOptIn, LayerSpec, OptedIn, ParameterStore,
};
pub use report::{EvolutionReport, JsonlWriter, LayerReport};
pub use scalar::Scalar;
pub use schedule::{Stage, StageSchedule};
pub use selection::{
    dominant_select, global_select, local_select, InferiorSet, Ranked, SelectionConfig,
    SelectionMode,
};

pub type Engine32 = Engine<f32>;
pub type Engine64 = Engine<f64>;
pub type EngineConfig32 = EngineConfig<f32>;
pub type EngineConfig64 = EngineConfig<f64>;
pub type DenseStore32 = DenseStore<f32>;
pub type DenseStore64 = DenseStore<f64>;
pub type StageSchedule32 = StageSchedule<f32>;
pub type StageSchedule64 = StageSchedule<f64>;
pub type HookRegistry32 = HookRegistry<f32>;
pub type HookRegistry64 = HookRegistry<f64>;
