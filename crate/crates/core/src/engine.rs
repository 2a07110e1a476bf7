//! Per-epoch orchestration: snapshot, select, match, cross over, report.
//!
//! An evolution step is computed as a complete [`EvolutionPlan`] from one
//! score snapshot before anything is written. Applying the plan either lands
//! every write or restores every element it touched.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::error::{Result, WeError};
use crate::evolve::{match_filters, plan_filter, CrossoverConfig, MatchPlan, MatchStrategy};
use crate::metrics::score_snapshot;
use crate::model::{LayerFamily, LayerKind, LayerOptIn, OptedIn, ParameterStore};
use crate::report::{EvolutionReport, LayerReport};
use crate::scalar::{bits_differ, Scalar};
use crate::selection::{
    dominant_select, global_select_at_rate, group_scores, local_select, InferiorSet, Ranked,
    SelectionConfig,
};

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig<S> {
    pub selection: SelectionConfig<S>,
    pub crossover: CrossoverConfig<S>,
    pub matching: MatchStrategy,
    /// Evolve after every `update_interval`-th epoch.
    pub update_interval: usize,
    pub opt_in: LayerOptIn,
}

impl<S: Scalar> EngineConfig<S> {
    pub fn new(selection: SelectionConfig<S>) -> Self {
        EngineConfig {
            selection,
            crossover: CrossoverConfig::default(),
            matching: MatchStrategy::Forward,
            update_interval: 1,
            opt_in: LayerOptIn::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.update_interval == 0 {
            return Err(WeError::InvalidConfig("update_interval must be >= 1".into()));
        }
        self.crossover.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementWrite<S> {
    pub filter_index: usize,
    pub offset: usize,
    pub old: S,
    pub new: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupPlan<S> {
    pub inferior: InferiorSet<S>,
    pub dominant: Vec<Ranked<S>>,
    pub matches: MatchPlan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerPlan<S> {
    pub layer_id: usize,
    pub name: String,
    pub kind: LayerKind,
    pub family: LayerFamily,
    pub groups: Vec<GroupPlan<S>>,
    pub writes: Vec<ElementWrite<S>>,
}

impl<S> LayerPlan<S> {
    pub fn inferior_count(&self) -> usize {
        self.groups.iter().map(|g| g.inferior.c()).sum()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.groups
            .iter()
            .flat_map(|g| g.matches.pairs.iter().copied())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionPlan<S> {
    pub epoch: usize,
    pub stage: usize,
    pub selection_rate: S,
    pub tbd_count: usize,
    pub layers: Vec<LayerPlan<S>>,
}

impl<S: Scalar> EvolutionPlan<S> {
    pub fn total_writes(&self) -> usize {
        self.layers.iter().map(|l| l.writes.len()).sum()
    }

    pub fn report(&self, wall_time_ms: f64) -> EvolutionReport {
        let layers: Vec<LayerReport> = self
            .layers
            .iter()
            .map(|l| LayerReport {
                layer_id: l.layer_id,
                name: l.name.clone(),
                kind: l.kind,
                family: l.family,
                inferior: l.inferior_count(),
                elements_changed: l.writes.len(),
                pairs: l.pairs(),
            })
            .collect();
        EvolutionReport {
            epoch: self.epoch,
            stage: self.stage,
            selection_rate: self.selection_rate.to_f64().unwrap_or(f64::NAN),
            tbd_count: self.tbd_count,
            total_inferior: layers.iter().map(|l| l.inferior).sum(),
            total_elements_changed: layers.iter().map(|l| l.elements_changed).sum(),
            layers,
            wall_time_ms,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Engine<S> {
    config: EngineConfig<S>,
}

impl<S: Scalar> Engine<S> {
    pub fn new(config: EngineConfig<S>) -> Result<Self> {
        config.validate()?;
        Ok(Engine { config })
    }

    pub fn config(&self) -> &EngineConfig<S> {
        &self.config
    }

    /// Whether evolution runs at the end of `epoch` (1-based).
    pub fn is_due(&self, epoch: usize) -> bool {
        epoch.is_multiple_of(self.config.update_interval)
    }

    /// Computes the full set of writes for `epoch` from the store's current
    /// values. `store` must already be restricted to the opted-in layers.
    pub fn plan<A: ParameterStore<S> + ?Sized>(
        &self,
        store: &A,
        epoch: usize,
    ) -> Result<EvolutionPlan<S>> {
        let sel = &self.config.selection;
        let stage = sel.schedule.stage_of(epoch)?;
        let rate = sel.schedule.selection_rate(epoch)?;
        let scores = score_snapshot(store)?;
        let tbd = global_select_at_rate(&scores, rate, sel.mode);
        let groups = group_scores(&scores);
        let inferior = local_select(&tbd, &groups, sel.gamma, sel.mode);

        let mut by_layer: BTreeMap<usize, Vec<GroupPlan<S>>> = BTreeMap::new();
        for set in inferior {
            let dominant = dominant_select(&groups[&(set.layer_id, set.group)], &set)?;
            let matches = match_filters(&set, &dominant, self.config.matching)?;
            by_layer.entry(set.layer_id).or_default().push(GroupPlan {
                inferior: set,
                dominant,
                matches,
            });
        }

        let mut specs: Vec<_> = store.layers().iter().collect();
        specs.sort_by_key(|l| l.layer_id);
        let mut layers = Vec::with_capacity(specs.len());
        for spec in specs {
            let groups = by_layer.remove(&spec.layer_id).unwrap_or_default();
            let mut writes = Vec::new();
            for g in &groups {
                for &(inf, dom) in &g.matches.pairs {
                    let iv = store.view(spec.layer_id, inf)?;
                    let dv = store.view(spec.layer_id, dom)?;
                    writes.extend(plan_filter(&iv, &dv, &self.config.crossover)?.into_iter().map(
                        |u| ElementWrite {
                            filter_index: inf,
                            offset: u.offset,
                            old: u.old,
                            new: u.new,
                        },
                    ));
                }
            }
            layers.push(LayerPlan {
                layer_id: spec.layer_id,
                name: spec.name.clone(),
                kind: spec.kind,
                family: spec.family,
                groups,
                writes,
            });
        }
        Ok(EvolutionPlan {
            epoch,
            stage: stage.index,
            selection_rate: rate,
            tbd_count: tbd.len(),
            layers,
        })
    }

    /// Executes one evolution step on the opted-in layers of `store`.
    pub fn evolve_once<A: ParameterStore<S> + ?Sized>(
        &mut self,
        store: &mut A,
        epoch: usize,
    ) -> Result<EvolutionReport> {
        let started = Instant::now();
        let mut view = OptedIn::new(store, &self.config.opt_in);
        let plan = self.plan(&view, epoch)?;
        apply_plan(&plan, &mut view)?;
        Ok(plan.report(started.elapsed().as_secs_f64() * 1e3))
    }
}

/// Writes every planned element, or none of them. Each target must still
/// hold the value the plan was computed from.
pub fn apply_plan<S: Scalar, A: ParameterStore<S> + ?Sized>(
    plan: &EvolutionPlan<S>,
    store: &mut A,
) -> Result<()> {
    let mut applied: Vec<(usize, &ElementWrite<S>)> = Vec::with_capacity(plan.total_writes());
    for layer in &plan.layers {
        for w in &layer.writes {
            if let Err(cause) = write_one(store, layer.layer_id, w) {
                return match rollback(store, &applied) {
                    Ok(()) => Err(cause),
                    Err(rb) => Err(WeError::RollbackFailed {
                        cause: Box::new(cause),
                        rollback: Box::new(rb),
                    }),
                };
            }
            applied.push((layer.layer_id, w));
        }
    }
    Ok(())
}

fn write_one<S: Scalar, A: ParameterStore<S> + ?Sized>(
    store: &mut A,
    layer_id: usize,
    w: &ElementWrite<S>,
) -> Result<()> {
    let buf = store.filter_mut(layer_id, w.filter_index)?;
    let slot = buf.get_mut(w.offset).ok_or(WeError::ElementCount {
        layer_id,
        expected: w.offset + 1,
        actual: 0,
    })?;
    if bits_differ(*slot, w.old) {
        return Err(WeError::Store(format!(
            "layer {layer_id} filter {} changed after planning",
            w.filter_index
        )));
    }
    *slot = w.new;
    Ok(())
}

fn rollback<S: Scalar, A: ParameterStore<S> + ?Sized>(
    store: &mut A,
    applied: &[(usize, &ElementWrite<S>)],
) -> Result<()> {
    for &(layer_id, w) in applied.iter().rev() {
        store.filter_mut(layer_id, w.filter_index)?[w.offset] = w.old;
    }
    Ok(())
}
