//! Global and local selection of inferior filters, and the matching
//! dominant pool.
//!
//! All sorts are total and deterministic: global candidates order by
//! `(avg_l1, layer_id, filter_index)`, per-group lists by
//! `(l1, filter_index)`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Result, WeError};
use crate::metrics::{ri_against, FilterScore};
use crate::model::FilterKey;
use crate::scalar::Scalar;
use crate::schedule::StageSchedule;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// Global candidates filtered by relative importance.
    #[default]
    Full,
    /// Global candidates only; no relative-importance test.
    GlobalOnly,
    /// Every filter is a candidate; relative importance alone decides.
    LocalOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionConfig<S> {
    pub schedule: StageSchedule<S>,
    pub gamma: S,
    pub mode: SelectionMode,
}

impl<S: Scalar> SelectionConfig<S> {
    pub fn new(schedule: StageSchedule<S>, gamma: S, mode: SelectionMode) -> Result<Self> {
        if !(gamma > S::zero() && gamma < S::one()) {
            return Err(WeError::InvalidConfig(format!(
                "gamma must be in (0, 1), got {gamma}"
            )));
        }
        Ok(SelectionConfig {
            schedule,
            gamma,
            mode,
        })
    }
}

/// A filter index with its plain ℓ1 norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranked<S> {
    pub filter_index: usize,
    pub l1: S,
}

/// Inferior filters of one layer group, ascending by ℓ1.
#[derive(Clone, Debug, PartialEq)]
pub struct InferiorSet<S> {
    pub layer_id: usize,
    pub group: usize,
    pub group_size: usize,
    pub members: Vec<Ranked<S>>,
}

impl<S> InferiorSet<S> {
    pub fn c(&self) -> usize {
        self.members.len()
    }
}

fn ascending<S: Scalar>(a: &Ranked<S>, b: &Ranked<S>) -> Ordering {
    total(a.l1, b.l1).then(a.filter_index.cmp(&b.filter_index))
}

fn total<S: Scalar>(a: S, b: S) -> Ordering {
    a.partial_cmp(&b).unwrap_or_else(|| a.is_nan().cmp(&b.is_nan()))
}

/// Number of global candidates, `floor(rate · M)`.
pub fn candidate_count<S: Scalar>(rate: S, total_filters: usize) -> usize {
    (rate * S::from_count(total_filters))
        .floor()
        .to_usize()
        .unwrap_or(0)
        .min(total_filters)
}

/// The `floor(r·M)` filters with the smallest average ℓ1 norm across the
/// whole network. In local-only mode every filter is returned.
pub fn global_select_at_rate<S: Scalar>(
    scores: &[FilterScore<S>],
    rate: S,
    mode: SelectionMode,
) -> BTreeSet<FilterKey> {
    if mode == SelectionMode::LocalOnly {
        return scores.iter().map(|s| s.key).collect();
    }
    let n = candidate_count(rate, scores.len());
    let mut order: Vec<&FilterScore<S>> = scores.iter().collect();
    order.sort_by(|a, b| total(a.avg_l1, b.avg_l1).then(a.key.cmp(&b.key)));
    order.into_iter().take(n).map(|s| s.key).collect()
}

pub fn global_select<S: Scalar>(
    scores: &[FilterScore<S>],
    epoch: usize,
    config: &SelectionConfig<S>,
) -> Result<BTreeSet<FilterKey>> {
    let rate = config.schedule.selection_rate(epoch)?;
    Ok(global_select_at_rate(scores, rate, config.mode))
}

/// Scores bucketed by `(layer_id, importance group)`, each bucket in
/// filter-index order.
pub fn group_scores<S: Scalar>(
    scores: &[FilterScore<S>],
) -> BTreeMap<(usize, usize), Vec<FilterScore<S>>> {
    let mut groups: BTreeMap<(usize, usize), Vec<FilterScore<S>>> = BTreeMap::new();
    for s in scores {
        groups.entry((s.key.layer_id, s.group)).or_default().push(*s);
    }
    for g in groups.values_mut() {
        g.sort_by_key(|s| s.key.filter_index);
    }
    groups
}

/// Per-group inferior sets: candidates whose relative importance is below
/// `gamma` (skipped for global-only), ascending by ℓ1, then cut to at most
/// half the group so a disjoint dominant pool of equal size exists.
///
/// One set is returned for every group, in `(layer_id, group)` order,
/// including empty ones.
pub fn local_select<S: Scalar>(
    tbd: &BTreeSet<FilterKey>,
    groups: &BTreeMap<(usize, usize), Vec<FilterScore<S>>>,
    gamma: S,
    mode: SelectionMode,
) -> Vec<InferiorSet<S>> {
    groups
        .iter()
        .map(|(&(layer_id, group), members)| {
            let max = members
                .iter()
                .fold(S::zero(), |m, s| if s.l1 > m { s.l1 } else { m });
            let mut picked: Vec<Ranked<S>> = members
                .iter()
                .filter(|s| tbd.contains(&s.key))
                .filter(|s| mode == SelectionMode::GlobalOnly || ri_against(s.l1, max) < gamma)
                .map(|s| Ranked {
                    filter_index: s.key.filter_index,
                    l1: s.l1,
                })
                .collect();
            picked.sort_by(ascending);
            picked.truncate(members.len() / 2);
            InferiorSet {
                layer_id,
                group,
                group_size: members.len(),
                members: picked,
            }
        })
        .collect()
}

/// The `c` largest-ℓ1 filters of the inferior set's group, never including
/// an inferior member, returned ascending by ℓ1. Among equal norms the lower
/// filter index ranks as more dominant.
pub fn dominant_select<S: Scalar>(
    group: &[FilterScore<S>],
    inferior: &InferiorSet<S>,
) -> Result<Vec<Ranked<S>>> {
    let c = inferior.c();
    let excluded: BTreeSet<usize> = inferior.members.iter().map(|m| m.filter_index).collect();
    let mut pool: Vec<Ranked<S>> = group
        .iter()
        .filter(|s| s.key.layer_id == inferior.layer_id && s.group == inferior.group)
        .filter(|s| !excluded.contains(&s.key.filter_index))
        .map(|s| Ranked {
            filter_index: s.key.filter_index,
            l1: s.l1,
        })
        .collect();
    if pool.len() < c {
        return Err(WeError::DominantPoolTooSmall {
            layer_id: inferior.layer_id,
            group: inferior.group,
            available: pool.len(),
            needed: c,
        });
    }
    pool.sort_by(|a, b| total(b.l1, a.l1).then(a.filter_index.cmp(&b.filter_index)));
    pool.truncate(c);
    pool.sort_by(ascending);
    Ok(pool)
}
