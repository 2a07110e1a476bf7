//! Norm statistics per filter.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WeError};
use crate::model::{enumerate_filters, FilterKey, FilterView, ParameterStore};
use crate::scalar::Scalar;

/// Norms of one filter. `group` is the importance group the filter is
/// compared within.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterScore<S> {
    pub key: FilterKey,
    pub avg_l1: S,
    pub l1: S,
    pub group: usize,
}

pub fn l1_norm<S: Scalar>(elements: &[S]) -> S {
    elements.iter().fold(S::zero(), |acc, &w| acc + w.abs())
}

/// Sum of absolute values divided by the number of input channels.
pub fn avg_l1_norm<S: Scalar>(view: &FilterView<'_, S>) -> S {
    l1_norm(view.elements()) / S::from_count(view.spec().input_channels)
}

pub fn score_filter<S: Scalar>(view: &FilterView<'_, S>) -> FilterScore<S> {
    let l1 = l1_norm(view.elements());
    FilterScore {
        key: view.key(),
        avg_l1: l1 / S::from_count(view.spec().input_channels),
        l1,
        group: view.spec().importance_group_of(view.index()),
    }
}

/// Scores every filter of every exposed layer, in enumeration order.
pub fn score_snapshot<S: Scalar, A: ParameterStore<S> + ?Sized>(
    store: &A,
) -> Result<Vec<FilterScore<S>>> {
    Ok(enumerate_filters(store)?.iter().map(score_filter).collect())
}

/// `l1 / max l1` over the filter's group, so 1 for the group maximum.
///
/// An all-zero group has no dominant filter to inherit from; every member
/// then gets importance 1 and never falls below a threshold.
pub fn relative_importance<S: Scalar>(
    score: &FilterScore<S>,
    group_scores: &[FilterScore<S>],
) -> Result<S> {
    if group_scores.is_empty() {
        return Err(WeError::EmptyGroup);
    }
    if !group_scores.iter().any(|s| s.key == score.key) {
        return Err(WeError::ScoreNotInGroup {
            layer_id: score.key.layer_id,
            filter: score.key.filter_index,
        });
    }
    let max = group_scores
        .iter()
        .map(|s| s.l1)
        .fold(S::zero(), |m, v| if v > m { v } else { m });
    Ok(ri_against(score.l1, max))
}

/// Relative importance given a precomputed group maximum.
pub(crate) fn ri_against<S: Scalar>(l1: S, group_max: S) -> S {
    if group_max <= S::zero() {
        S::one()
    } else {
        l1 / group_max
    }
}

/// Mean of `avg_l1` per layer, in layer order: `(layer_id, mean)`.
pub fn layer_mean_avg_l1<S: Scalar>(scores: &[FilterScore<S>]) -> Vec<(usize, S)> {
    let mut out: Vec<(usize, S, usize)> = Vec::new();
    for s in scores {
        match out.last_mut() {
            Some((id, sum, n)) if *id == s.key.layer_id => {
                *sum += s.avg_l1;
                *n += 1;
            }
            _ => out.push((s.key.layer_id, s.avg_l1, 1)),
        }
    }
    out.into_iter()
        .map(|(id, sum, n)| (id, sum / S::from_count(n)))
        .collect()
}
