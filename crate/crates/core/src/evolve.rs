//! Matching of inferior to dominant filters and slice-wise crossover.
//!
//! For each slice pair the recipient's smallest-magnitude element `w_q` is
//! replaced by `α·w_q + (1−α)·w_p`, where `w_p` is the donor slice's
//! largest-magnitude element. With the adaptive coefficient
//! `α = |w_q| / (|w_q| + |w_p|)` the larger gene contributes more.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WeError};
use crate::metrics::l1_norm;
use crate::model::{FilterView, FilterViewMut};
use crate::scalar::{bits_differ, Scalar};
use crate::selection::{InferiorSet, Ranked};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchStrategy {
    /// k-th weakest inferior with k-th weakest dominant.
    #[default]
    Forward,
    /// k-th weakest inferior with k-th strongest dominant.
    Reverse,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPlan {
    pub layer_id: usize,
    pub group: usize,
    pub strategy: MatchStrategy,
    /// `(inferior_index, dominant_index)` in ascending inferior order.
    pub pairs: Vec<(usize, usize)>,
}

/// Pairs two ascending lists of equal length.
pub fn match_filters<S: Scalar>(
    inferior: &InferiorSet<S>,
    dominant: &[Ranked<S>],
    strategy: MatchStrategy,
) -> Result<MatchPlan> {
    let c = inferior.c();
    if dominant.len() != c {
        return Err(WeError::LengthMismatch {
            left: c,
            right: dominant.len(),
        });
    }
    let pairs = inferior
        .members
        .iter()
        .enumerate()
        .map(|(k, inf)| {
            let d = match strategy {
                MatchStrategy::Forward => k,
                MatchStrategy::Reverse => c - 1 - k,
            };
            (inf.filter_index, dominant[d].filter_index)
        })
        .collect();
    Ok(MatchPlan {
        layer_id: inferior.layer_id,
        group: inferior.group,
        strategy,
        pairs,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "value")]
pub enum AlphaMode<S> {
    #[default]
    Adaptive,
    Fixed(S),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossoverLevel {
    /// One gene per slice.
    #[default]
    Element,
    /// Whole-filter convex combination.
    Filter,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CrossoverConfig<S> {
    pub alpha: AlphaMode<S>,
    pub level: CrossoverLevel,
}

impl<S: Scalar> CrossoverConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if let AlphaMode::Fixed(a) = self.alpha {
            if !(a >= S::zero() && a <= S::one()) {
                return Err(WeError::InvalidConfig(format!(
                    "fixed alpha must be in [0, 1], got {a}"
                )));
            }
        }
        Ok(())
    }
}

/// The fixed coefficients of the α ablation, `0.0, 0.1, …, 1.0`.
pub fn alpha_sweep_values<S: Scalar>() -> Vec<S> {
    (0..=10).map(|i| S::from_count(i) / S::from_count(10)).collect()
}

/// `|a| / (|a| + |b|)`; callers exclude the all-zero case.
pub fn adaptive_alpha<S: Scalar>(w_q: S, w_p: S) -> S {
    w_q.abs() / (w_q.abs() + w_p.abs())
}

/// First index of the smallest magnitude.
pub fn argmin_abs<S: Scalar>(v: &[S]) -> usize {
    let mut best = 0;
    for k in 1..v.len() {
        if v[k].abs() < v[best].abs() {
            best = k;
        }
    }
    best
}

/// First index of the largest magnitude.
pub fn argmax_abs<S: Scalar>(v: &[S]) -> usize {
    let mut best = 0;
    for k in 1..v.len() {
        if v[k].abs() > v[best].abs() {
            best = k;
        }
    }
    best
}

/// One planned write.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementUpdate<S> {
    pub offset: usize,
    pub old: S,
    pub new: S,
}

/// Computes the crossover of one slice pair without writing. `None` when the
/// element would keep its exact bit pattern, including the zero-zero case.
pub fn plan_slice<S: Scalar>(
    inf: &[S],
    dom: &[S],
    alpha: AlphaMode<S>,
) -> Result<Option<ElementUpdate<S>>> {
    if inf.len() != dom.len() {
        return Err(WeError::LengthMismatch {
            left: inf.len(),
            right: dom.len(),
        });
    }
    if inf.is_empty() {
        return Err(WeError::EmptySlice);
    }
    let q = argmin_abs(inf);
    let p = argmax_abs(dom);
    let (w_q, w_p) = (inf[q], dom[p]);
    if w_q.abs() + w_p.abs() == S::zero() {
        return Ok(None);
    }
    let a = match alpha {
        AlphaMode::Adaptive => adaptive_alpha(w_q, w_p),
        AlphaMode::Fixed(a) => a,
    };
    let new = a * w_q + (S::one() - a) * w_p;
    Ok(bits_differ(new, w_q).then_some(ElementUpdate {
        offset: q,
        old: w_q,
        new,
    }))
}

/// Crossover of one slice pair in place; returns the changed index.
pub fn crossover_slice<S: Scalar>(
    inf: &mut [S],
    dom: &[S],
    alpha: AlphaMode<S>,
) -> Result<Option<usize>> {
    let update = plan_slice(inf, dom, alpha)?;
    Ok(update.map(|u| {
        inf[u.offset] = u.new;
        u.offset
    }))
}

fn check_pair<S: Scalar>(inf: &FilterView<'_, S>, dom: &FilterView<'_, S>) -> Result<()> {
    if !inf.spec().same_filter_shape(dom.spec()) || inf.len() != dom.len() {
        return Err(WeError::ShapeMismatch(format!(
            "{} I={} K={} vs {} I={} K={}",
            inf.spec().kind,
            inf.spec().input_channels,
            inf.spec().kernel_size,
            dom.spec().kind,
            dom.spec().input_channels,
            dom.spec().kernel_size,
        )));
    }
    Ok(())
}

/// Writes needed to evolve `inf` from `dom`, with offsets into the filter.
/// Only elements whose bit pattern changes are listed.
pub fn plan_filter<S: Scalar>(
    inf: &FilterView<'_, S>,
    dom: &FilterView<'_, S>,
    config: &CrossoverConfig<S>,
) -> Result<Vec<ElementUpdate<S>>> {
    check_pair(inf, dom)?;
    match config.level {
        CrossoverLevel::Element => {
            let n = inf.spec().slice_len();
            let mut out = Vec::with_capacity(inf.spec().slice_count());
            for (s, (a, b)) in inf.slices().zip(dom.slices()).enumerate() {
                if let Some(mut u) = plan_slice(a, b, config.alpha)? {
                    u.offset += s * n;
                    out.push(u);
                }
            }
            Ok(out)
        }
        CrossoverLevel::Filter => {
            let a = match config.alpha {
                AlphaMode::Fixed(a) => a,
                AlphaMode::Adaptive => {
                    let (li, ld) = (l1_norm(inf.elements()), l1_norm(dom.elements()));
                    if li + ld == S::zero() {
                        return Ok(Vec::new());
                    }
                    li / (li + ld)
                }
            };
            let b = S::one() - a;
            Ok(inf
                .elements()
                .iter()
                .zip(dom.elements())
                .enumerate()
                .filter_map(|(offset, (&x, &y))| {
                    let new = a * x + b * y;
                    bits_differ(new, x).then_some(ElementUpdate { offset, old: x, new })
                })
                .collect())
        }
    }
}

/// Evolves `inf` in place from `dom`; returns the number of changed elements.
pub fn crossover_filter<S: Scalar>(
    inf: &mut FilterViewMut<'_, S>,
    dom: &FilterView<'_, S>,
    config: &CrossoverConfig<S>,
) -> Result<usize> {
    let updates = plan_filter(&inf.as_view(), dom, config)?;
    let elements = inf.elements_mut();
    for u in &updates {
        elements[u.offset] = u.new;
    }
    Ok(updates.len())
}
