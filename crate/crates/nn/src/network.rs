use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use wevo::{LayerFamily, LayerKind, LayerSpec, ParameterStore, WeError};

use crate::layers::{BatchNorm2d, Conv2d, GlobalAvgPool, Linear, Relu};
use crate::param::{Buffer, Param, ParamRole};
use crate::tensor::Tensor;

#[derive(Clone, Debug)]
pub enum Node {
    Conv(Conv2d),
    Bn(BatchNorm2d),
    Relu(Relu),
    Pool(GlobalAvgPool),
    Linear(Linear),
    /// `body(x) + shortcut(x)`; an empty shortcut is the identity.
    Residual { body: Vec<Node>, shortcut: Vec<Node> },
}

fn forward_seq(nodes: &mut [Node], params: &[Param], buffers: &mut [Buffer], mut x: Tensor, train: bool) -> Tensor {
    for node in nodes {
        x = match node {
            Node::Conv(l) => l.forward(params, x, train),
            Node::Bn(l) => l.forward(params, buffers, x, train),
            Node::Relu(l) => l.forward(x, train),
            Node::Pool(l) => l.forward(x, train),
            Node::Linear(l) => l.forward(params, x, train),
            Node::Residual { body, shortcut } => {
                let skip = forward_seq(shortcut, params, buffers, x.clone(), train);
                let mut y = forward_seq(body, params, buffers, x, train);
                y.add_assign(&skip);
                y
            }
        };
    }
    x
}

fn backward_seq(nodes: &mut [Node], params: &mut [Param], mut g: Tensor) -> Tensor {
    for node in nodes.iter_mut().rev() {
        g = match node {
            Node::Conv(l) => l.backward(params, g),
            Node::Bn(l) => l.backward(params, g),
            Node::Relu(l) => l.backward(g),
            Node::Pool(l) => l.backward(g),
            Node::Linear(l) => l.backward(params, g),
            Node::Residual { body, shortcut } => {
                let gs = backward_seq(shortcut, params, g.clone());
                let mut gb = backward_seq(body, params, g);
                gb.add_assign(&gs);
                gb
            }
        };
    }
    g
}

/// A feed-forward network whose parameters live in one arena. Every
/// parameter tensor is one evolvable layer for [`ParameterStore`], with
/// `layer_id` equal to its arena index.
#[derive(Clone, Debug)]
pub struct Network {
    params: Vec<Param>,
    buffers: Vec<Buffer>,
    nodes: Vec<Node>,
    specs: Vec<LayerSpec>,
}

impl Network {
    pub fn new(params: Vec<Param>, buffers: Vec<Buffer>, nodes: Vec<Node>) -> Self {
        let specs = params
            .iter()
            .enumerate()
            .map(|(id, p)| layer_spec(id, p))
            .collect();
        Network {
            params,
            buffers,
            nodes,
            specs,
        }
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param] {
        &mut self.params
    }

    pub fn buffers(&self) -> &[Buffer] {
        &self.buffers
    }

    pub fn buffers_mut(&mut self) -> &mut [Buffer] {
        &mut self.buffers
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn forward(&mut self, x: Tensor, train: bool) -> Tensor {
        forward_seq(&mut self.nodes, &self.params, &mut self.buffers, x, train)
    }

    /// Accumulates parameter gradients from a training-mode forward pass.
    pub fn backward(&mut self, grad: Tensor) {
        backward_seq(&mut self.nodes, &mut self.params, grad);
    }

    pub fn zero_grad(&mut self) {
        self.params.iter_mut().for_each(Param::zero_grad);
    }
}

fn layer_spec(layer_id: usize, p: &Param) -> LayerSpec {
    let (kind, family, c, i, k, g) = match p.role {
        ParamRole::ConvWeight {
            out_channels,
            in_channels,
            kernel,
            groups,
        } => {
            let per_group = in_channels / groups;
            let kind = if groups == 1 && kernel == 1 {
                LayerKind::PointwiseConv
            } else if groups == 1 {
                LayerKind::OrdinaryConv
            } else if groups == in_channels && groups == out_channels {
                LayerKind::DepthwiseConv
            } else {
                LayerKind::GroupedConv
            };
            (kind, LayerFamily::Conv, out_channels, per_group, kernel, groups)
        }
        ParamRole::ConvBias { channels } => (LayerKind::Bias, LayerFamily::Conv, channels, 1, 1, 1),
        ParamRole::BnWeight { channels } => (LayerKind::BnScale, LayerFamily::BatchNorm, channels, 1, 1, 1),
        ParamRole::BnBias { channels } => (LayerKind::Bias, LayerFamily::BatchNorm, channels, 1, 1, 1),
        ParamRole::LinearWeight {
            out_features,
            in_features,
        } => (LayerKind::PointwiseConv, LayerFamily::Classifier, out_features, in_features, 1, 1),
        ParamRole::LinearBias { features } => (LayerKind::Bias, LayerFamily::Classifier, features, 1, 1, 1),
    };
    LayerSpec::new(layer_id, p.name.clone(), kind, family, c, i, k, g)
        .expect("parameter roles always describe valid layers")
}

impl ParameterStore<f32> for Network {
    fn layers(&self) -> &[LayerSpec] {
        &self.specs
    }

    fn filter(&self, layer_id: usize, filter_index: usize) -> wevo::Result<&[f32]> {
        let spec = self.specs.get(layer_id).ok_or(WeError::UnknownLayer(layer_id))?;
        if filter_index >= spec.filter_count {
            return Err(WeError::FilterOutOfRange {
                layer_id,
                filter: filter_index,
                count: spec.filter_count,
            });
        }
        let n = spec.filter_len();
        Ok(&self.params[layer_id].value[filter_index * n..(filter_index + 1) * n])
    }

    fn filter_mut(&mut self, layer_id: usize, filter_index: usize) -> wevo::Result<&mut [f32]> {
        let spec = self.specs.get(layer_id).ok_or(WeError::UnknownLayer(layer_id))?;
        if filter_index >= spec.filter_count {
            return Err(WeError::FilterOutOfRange {
                layer_id,
                filter: filter_index,
                count: spec.filter_count,
            });
        }
        let n = spec.filter_len();
        Ok(&mut self.params[layer_id].value[filter_index * n..(filter_index + 1) * n])
    }
}

/// Allocates parameters with standard initialisations while assembling a
/// network.
pub struct Builder<'r, R: Rng> {
    rng: &'r mut R,
    params: Vec<Param>,
    buffers: Vec<Buffer>,
}

impl<'r, R: Rng> Builder<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        Builder {
            rng,
            params: Vec::new(),
            buffers: Vec::new(),
        }
    }

    fn param(&mut self, name: String, role: ParamRole, value: Vec<f32>) -> usize {
        self.params.push(Param::new(name, role, value));
        self.params.len() - 1
    }

    fn buffer(&mut self, name: String, value: Vec<f32>) -> usize {
        self.buffers.push(Buffer { name, value });
        self.buffers.len() - 1
    }

    /// Bias-free convolution with He-normal weights.
    pub fn conv(
        &mut self,
        name: &str,
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        groups: usize,
    ) -> Node {
        let role = ParamRole::ConvWeight {
            out_channels,
            in_channels,
            kernel,
            groups,
        };
        let fan_in = (in_channels / groups) * kernel * kernel;
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("finite std");
        let value = (0..role.len()).map(|_| normal.sample(self.rng) as f32).collect();
        let w = self.param(format!("{name}.weight"), role, value);
        Node::Conv(Conv2d::new(in_channels, out_channels, kernel, stride, kernel / 2, groups, w, None))
    }

    pub fn bn(&mut self, name: &str, channels: usize) -> Node {
        let w = self.param(format!("{name}.weight"), ParamRole::BnWeight { channels }, vec![1.0; channels]);
        let b = self.param(format!("{name}.bias"), ParamRole::BnBias { channels }, vec![0.0; channels]);
        let rm = self.buffer(format!("{name}.running_mean"), vec![0.0; channels]);
        let rv = self.buffer(format!("{name}.running_var"), vec![1.0; channels]);
        Node::Bn(BatchNorm2d::new(channels, w, b, rm, rv))
    }

    pub fn linear(&mut self, name: &str, in_features: usize, out_features: usize) -> Node {
        let bound = 1.0 / (in_features as f32).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        let wv = (0..in_features * out_features).map(|_| dist.sample(self.rng)).collect();
        let bv = (0..out_features).map(|_| dist.sample(self.rng)).collect();
        let w = self.param(
            format!("{name}.weight"),
            ParamRole::LinearWeight {
                out_features,
                in_features,
            },
            wv,
        );
        let b = self.param(format!("{name}.bias"), ParamRole::LinearBias { features: out_features }, bv);
        Node::Linear(Linear::new(in_features, out_features, w, b))
    }

    /// `conv → bn → relu`.
    pub fn conv_bn_relu(
        &mut self,
        name: &str,
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        groups: usize,
    ) -> Vec<Node> {
        vec![
            self.conv(&format!("{name}.conv"), in_channels, out_channels, kernel, stride, groups),
            self.bn(&format!("{name}.bn"), out_channels),
            Node::Relu(Relu::default()),
        ]
    }

    pub fn finish(self, nodes: Vec<Node>) -> Network {
        Network::new(self.params, self.buffers, nodes)
    }
}
