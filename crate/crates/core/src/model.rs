//! Filter addressing over an abstract parameter store.
//!
//! Every evolvable parameter tensor is described by a [`LayerSpec`] and split
//! into filters of `I × K × K` elements. Convolution weights map directly;
//! batch-norm scales and biases are layers of scalar filters (`I = K = 1`).
//! A classifier weight matrix `[out, in]` can be exposed as a pointwise layer.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WeError};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    OrdinaryConv,
    DepthwiseConv,
    PointwiseConv,
    GroupedConv,
    BnScale,
    Bias,
}

impl LayerKind {
    pub fn is_scalar(self) -> bool {
        matches!(self, LayerKind::BnScale | LayerKind::Bias)
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LayerKind::OrdinaryConv => "ordinary-conv",
            LayerKind::DepthwiseConv => "depthwise-conv",
            LayerKind::PointwiseConv => "pointwise-conv",
            LayerKind::GroupedConv => "grouped-conv",
            LayerKind::BnScale => "bn-scale",
            LayerKind::Bias => "bias",
        };
        f.write_str(s)
    }
}

/// Which network component a parameter belongs to. Variant flags opt whole
/// families in or out (a BN shift is a `Bias` of family `BatchNorm`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerFamily {
    Conv,
    BatchNorm,
    Classifier,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub layer_id: usize,
    pub name: String,
    pub kind: LayerKind,
    pub family: LayerFamily,
    pub filter_count: usize,
    pub input_channels: usize,
    pub kernel_size: usize,
    pub group_count: usize,
}

impl LayerSpec {
    /// Builds and validates a spec.
    pub fn new(
        layer_id: usize,
        name: impl Into<String>,
        kind: LayerKind,
        family: LayerFamily,
        filter_count: usize,
        input_channels: usize,
        kernel_size: usize,
        group_count: usize,
    ) -> Result<Self> {
        let spec = LayerSpec {
            layer_id,
            name: name.into(),
            kind,
            family,
            filter_count,
            input_channels,
            kernel_size,
            group_count,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Scalar-filter layer (BN scale or bias) with `count` filters.
    pub fn scalar(
        layer_id: usize,
        name: impl Into<String>,
        kind: LayerKind,
        family: LayerFamily,
        count: usize,
    ) -> Result<Self> {
        Self::new(layer_id, name, kind, family, count, 1, 1, 1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(WeError::InvalidLayer {
                layer_id: self.layer_id,
                reason: reason.to_string(),
            })
        };
        if self.filter_count == 0
            || self.input_channels == 0
            || self.kernel_size == 0
            || self.group_count == 0
        {
            return bad("filter_count, input_channels, kernel_size and group_count must be >= 1");
        }
        if !self.filter_count.is_multiple_of(self.group_count) {
            return bad("group_count must divide filter_count");
        }
        match self.kind {
            LayerKind::BnScale | LayerKind::Bias => {
                if self.input_channels != 1 || self.kernel_size != 1 {
                    return bad("scalar filters need input_channels = kernel_size = 1");
                }
            }
            LayerKind::DepthwiseConv => {
                if self.input_channels != 1 {
                    return bad("depthwise filters have a single input channel");
                }
                if self.group_count != self.filter_count {
                    return bad("depthwise layers have one group per filter");
                }
            }
            LayerKind::PointwiseConv => {
                if self.kernel_size != 1 {
                    return bad("pointwise filters have kernel size 1");
                }
            }
            LayerKind::OrdinaryConv | LayerKind::GroupedConv => {}
        }
        if self.group_count > 1
            && !matches!(self.kind, LayerKind::GroupedConv | LayerKind::DepthwiseConv)
        {
            return bad("group_count > 1 requires a grouped or depthwise convolution");
        }
        Ok(())
    }

    /// Elements per filter, `I·K²`.
    pub fn filter_len(&self) -> usize {
        self.input_channels * self.slice_len()
    }

    /// Elements per slice, `K²`.
    pub fn slice_len(&self) -> usize {
        self.kernel_size * self.kernel_size
    }

    pub fn slice_count(&self) -> usize {
        self.input_channels
    }

    /// Total elements in the layer.
    pub fn element_count(&self) -> usize {
        self.filter_count * self.filter_len()
    }

    /// Convolution group containing filter `j`: `floor(j / (C / G))`.
    pub fn group_of(&self, filter_index: usize) -> usize {
        filter_index / (self.filter_count / self.group_count)
    }

    /// Number of groups over which relative importance and matching are
    /// computed. Grouped convolutions use their convolution groups. A
    /// depthwise layer's groups are singletons, which would pin every
    /// relative importance at 1, so its filters are compared layer-wide like
    /// any other single-input-channel convolution.
    pub fn importance_group_count(&self) -> usize {
        match self.kind {
            LayerKind::DepthwiseConv => 1,
            _ => self.group_count,
        }
    }

    /// Importance group of filter `j`; see [`importance_group_count`](Self::importance_group_count).
    pub fn importance_group_of(&self, filter_index: usize) -> usize {
        filter_index / (self.filter_count / self.importance_group_count())
    }

    pub fn importance_group_size(&self) -> usize {
        self.filter_count / self.importance_group_count()
    }

    /// True when `other` has the same filter geometry.
    pub fn same_filter_shape(&self, other: &LayerSpec) -> bool {
        self.kind == other.kind
            && self.input_channels == other.input_channels
            && self.kernel_size == other.kernel_size
    }
}

/// `(layer_id, filter_index)`; orders lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FilterKey {
    pub layer_id: usize,
    pub filter_index: usize,
}

impl FilterKey {
    pub fn new(layer_id: usize, filter_index: usize) -> Self {
        FilterKey {
            layer_id,
            filter_index,
        }
    }
}

/// Read-only view of one filter.
#[derive(Clone, Copy, Debug)]
pub struct FilterView<'a, S> {
    spec: &'a LayerSpec,
    index: usize,
    elements: &'a [S],
}

impl<'a, S: Scalar> FilterView<'a, S> {
    pub fn new(spec: &'a LayerSpec, index: usize, elements: &'a [S]) -> Result<Self> {
        check_filter(spec, index, elements.len())?;
        Ok(FilterView {
            spec,
            index,
            elements,
        })
    }

    pub fn spec(&self) -> &'a LayerSpec {
        self.spec
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn key(&self) -> FilterKey {
        FilterKey::new(self.spec.layer_id, self.index)
    }

    pub fn group(&self) -> usize {
        self.spec.group_of(self.index)
    }

    pub fn elements(&self) -> &'a [S] {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The `s`-th `K × K` slice, flattened row-major.
    pub fn slice(&self, s: usize) -> &'a [S] {
        let n = self.spec.slice_len();
        &self.elements[s * n..(s + 1) * n]
    }

    pub fn slices(&self) -> std::slice::ChunksExact<'a, S> {
        self.elements.chunks_exact(self.spec.slice_len())
    }
}

/// Mutable view of one filter; writes land in the underlying store.
#[derive(Debug)]
pub struct FilterViewMut<'a, S> {
    spec: &'a LayerSpec,
    index: usize,
    elements: &'a mut [S],
}

impl<'a, S: Scalar> FilterViewMut<'a, S> {
    pub fn new(spec: &'a LayerSpec, index: usize, elements: &'a mut [S]) -> Result<Self> {
        check_filter(spec, index, elements.len())?;
        Ok(FilterViewMut {
            spec,
            index,
            elements,
        })
    }

    pub fn spec(&self) -> &LayerSpec {
        self.spec
    }

    pub fn key(&self) -> FilterKey {
        FilterKey::new(self.spec.layer_id, self.index)
    }

    pub fn as_view(&self) -> FilterView<'_, S> {
        FilterView {
            spec: self.spec,
            index: self.index,
            elements: self.elements,
        }
    }

    pub fn elements_mut(&mut self) -> &mut [S] {
        self.elements
    }

    pub fn slice_mut(&mut self, s: usize) -> &mut [S] {
        let n = self.spec.slice_len();
        &mut self.elements[s * n..(s + 1) * n]
    }

    pub fn slices_mut(&mut self) -> std::slice::ChunksExactMut<'_, S> {
        let n = self.spec.slice_len();
        self.elements.chunks_exact_mut(n)
    }
}

fn check_filter(spec: &LayerSpec, index: usize, len: usize) -> Result<()> {
    if index >= spec.filter_count {
        return Err(WeError::FilterOutOfRange {
            layer_id: spec.layer_id,
            filter: index,
            count: spec.filter_count,
        });
    }
    if len != spec.filter_len() {
        return Err(WeError::ElementCount {
            layer_id: spec.layer_id,
            expected: spec.filter_len(),
            actual: len,
        });
    }
    Ok(())
}

/// Adapter over a framework's live parameters.
///
/// `layers()` must return the same specs in the same order on every call
/// within a run. Each filter's elements are a contiguous `I·K²` run. Holding
/// `&mut` to the store is the exclusive session: nothing else may read or
/// write parameters while evolution runs.
pub trait ParameterStore<S: Scalar> {
    fn layers(&self) -> &[LayerSpec];

    fn filter(&self, layer_id: usize, filter_index: usize) -> Result<&[S]>;

    fn filter_mut(&mut self, layer_id: usize, filter_index: usize) -> Result<&mut [S]>;

    fn spec(&self, layer_id: usize) -> Result<&LayerSpec> {
        self.layers()
            .iter()
            .find(|l| l.layer_id == layer_id)
            .ok_or(WeError::UnknownLayer(layer_id))
    }

    fn view(&self, layer_id: usize, filter_index: usize) -> Result<FilterView<'_, S>> {
        let spec = self.spec(layer_id)?;
        FilterView::new(spec, filter_index, self.filter(layer_id, filter_index)?)
    }
}

impl<S: Scalar, T: ParameterStore<S> + ?Sized> ParameterStore<S> for &mut T {
    fn layers(&self) -> &[LayerSpec] {
        (**self).layers()
    }

    fn filter(&self, layer_id: usize, filter_index: usize) -> Result<&[S]> {
        (**self).filter(layer_id, filter_index)
    }

    fn filter_mut(&mut self, layer_id: usize, filter_index: usize) -> Result<&mut [S]> {
        (**self).filter_mut(layer_id, filter_index)
    }
}

/// Every filter of every exposed layer in `(layer_id, filter_index)` order.
pub fn enumerate_filters<S: Scalar, A: ParameterStore<S> + ?Sized>(
    store: &A,
) -> Result<Vec<FilterView<'_, S>>> {
    let layers = store.layers();
    if layers.is_empty() {
        return Err(WeError::NoEvolvableLayers);
    }
    let mut order: Vec<&LayerSpec> = layers.iter().collect();
    order.sort_by_key(|l| l.layer_id);
    let mut out = Vec::with_capacity(order.iter().map(|l| l.filter_count).sum());
    for spec in order {
        for j in 0..spec.filter_count {
            out.push(FilterView::new(spec, j, store.filter(spec.layer_id, j)?)?);
        }
    }
    Ok(out)
}

/// Group index of the filter behind `view`.
pub fn group_of<S: Scalar>(view: &FilterView<'_, S>) -> usize {
    view.group()
}

/// Which layer families take part in evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerOptIn {
    pub conv: bool,
    pub batch_norm: bool,
    /// Fully-connected classifier weights. Off by default.
    pub classifier: bool,
}

impl Default for LayerOptIn {
    fn default() -> Self {
        LayerOptIn {
            conv: true,
            batch_norm: true,
            classifier: false,
        }
    }
}

impl LayerOptIn {
    pub fn admits(&self, spec: &LayerSpec) -> bool {
        match spec.family {
            LayerFamily::Conv => self.conv,
            LayerFamily::BatchNorm => self.batch_norm,
            LayerFamily::Classifier => self.classifier,
        }
    }
}

/// Restricts a store to the layers admitted by a [`LayerOptIn`]. Layer ids
/// are preserved.
pub struct OptedIn<'a, S: Scalar, A: ParameterStore<S> + ?Sized> {
    inner: &'a mut A,
    layers: Vec<LayerSpec>,
    _scalar: std::marker::PhantomData<S>,
}

impl<'a, S: Scalar, A: ParameterStore<S> + ?Sized> OptedIn<'a, S, A> {
    pub fn new(inner: &'a mut A, opt_in: &LayerOptIn) -> Self {
        let layers = inner
            .layers()
            .iter()
            .filter(|l| opt_in.admits(l))
            .cloned()
            .collect();
        OptedIn {
            inner,
            layers,
            _scalar: std::marker::PhantomData,
        }
    }

    fn admitted(&self, layer_id: usize) -> Result<()> {
        if self.layers.iter().any(|l| l.layer_id == layer_id) {
            Ok(())
        } else {
            Err(WeError::UnknownLayer(layer_id))
        }
    }
}

impl<S: Scalar, A: ParameterStore<S> + ?Sized> ParameterStore<S> for OptedIn<'_, S, A> {
    fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    fn filter(&self, layer_id: usize, filter_index: usize) -> Result<&[S]> {
        self.admitted(layer_id)?;
        self.inner.filter(layer_id, filter_index)
    }

    fn filter_mut(&mut self, layer_id: usize, filter_index: usize) -> Result<&mut [S]> {
        self.admitted(layer_id)?;
        self.inner.filter_mut(layer_id, filter_index)
    }
}

/// In-memory store holding one dense buffer per layer. Used for reference
/// networks, checkpoints and tests.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DenseStore<S> {
    layers: Vec<LayerSpec>,
    values: Vec<Vec<S>>,
}

impl<S: Scalar> DenseStore<S> {
    pub fn new() -> Self {
        DenseStore {
            layers: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Appends a layer; its `layer_id` becomes the next ordinal.
    pub fn push(
        &mut self,
        name: impl Into<String>,
        kind: LayerKind,
        family: LayerFamily,
        filter_count: usize,
        input_channels: usize,
        kernel_size: usize,
        group_count: usize,
        values: Vec<S>,
    ) -> Result<usize> {
        let id = self.layers.len();
        let spec = LayerSpec::new(
            id,
            name,
            kind,
            family,
            filter_count,
            input_channels,
            kernel_size,
            group_count,
        )?;
        self.push_spec(spec, values)
    }

    /// Appends a layer under the spec's own `layer_id`.
    pub fn push_spec(&mut self, spec: LayerSpec, values: Vec<S>) -> Result<usize> {
        spec.validate()?;
        if values.len() != spec.element_count() {
            return Err(WeError::ElementCount {
                layer_id: spec.layer_id,
                expected: spec.element_count(),
                actual: values.len(),
            });
        }
        if self.layers.iter().any(|l| l.layer_id == spec.layer_id) {
            return Err(WeError::InvalidLayer {
                layer_id: spec.layer_id,
                reason: "duplicate layer id".into(),
            });
        }
        let id = spec.layer_id;
        self.layers.push(spec);
        self.values.push(values);
        Ok(id)
    }

    fn position(&self, layer_id: usize) -> Result<usize> {
        self.layers
            .iter()
            .position(|l| l.layer_id == layer_id)
            .ok_or(WeError::UnknownLayer(layer_id))
    }

    pub fn values(&self, layer_id: usize) -> Result<&[S]> {
        Ok(&self.values[self.position(layer_id)?])
    }

    pub fn values_mut(&mut self, layer_id: usize) -> Result<&mut [S]> {
        let pos = self.position(layer_id)?;
        Ok(&mut self.values[pos])
    }

    /// All elements of all layers, concatenated in layer order.
    pub fn flatten(&self) -> Vec<S> {
        self.values.iter().flatten().copied().collect()
    }

    /// Applies `f` to every element.
    pub fn map_in_place(&mut self, mut f: impl FnMut(S) -> S) {
        for v in self.values.iter_mut().flatten() {
            *v = f(*v);
        }
    }
}

impl<S: Scalar> ParameterStore<S> for DenseStore<S> {
    fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    fn filter(&self, layer_id: usize, filter_index: usize) -> Result<&[S]> {
        let pos = self.position(layer_id)?;
        let spec = &self.layers[pos];
        check_filter(spec, filter_index, spec.filter_len())?;
        let n = spec.filter_len();
        Ok(&self.values[pos][filter_index * n..(filter_index + 1) * n])
    }

    fn filter_mut(&mut self, layer_id: usize, filter_index: usize) -> Result<&mut [S]> {
        let pos = self.position(layer_id)?;
        let spec = &self.layers[pos];
        check_filter(spec, filter_index, spec.filter_len())?;
        let n = spec.filter_len();
        Ok(&mut self.values[pos][filter_index * n..(filter_index + 1) * n])
    }
}
