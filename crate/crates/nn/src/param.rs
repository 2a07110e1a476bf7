use serde::{Deserialize, Serialize};

/// What a parameter tensor is, with the geometry needed to address filters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "role")]
pub enum ParamRole {
    ConvWeight {
        out_channels: usize,
        in_channels: usize,
        kernel: usize,
        groups: usize,
    },
    ConvBias {
        channels: usize,
    },
    BnWeight {
        channels: usize,
    },
    BnBias {
        channels: usize,
    },
    LinearWeight {
        out_features: usize,
        in_features: usize,
    },
    LinearBias {
        features: usize,
    },
}

impl ParamRole {
    pub fn len(&self) -> usize {
        match *self {
            ParamRole::ConvWeight {
                out_channels,
                in_channels,
                kernel,
                groups,
            } => out_channels * (in_channels / groups) * kernel * kernel,
            ParamRole::ConvBias { channels }
            | ParamRole::BnWeight { channels }
            | ParamRole::BnBias { channels } => channels,
            ParamRole::LinearWeight {
                out_features,
                in_features,
            } => out_features * in_features,
            ParamRole::LinearBias { features } => features,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub role: ParamRole,
    pub value: Vec<f32>,
    pub grad: Vec<f32>,
}

impl Param {
    pub fn new(name: impl Into<String>, role: ParamRole, value: Vec<f32>) -> Self {
        assert_eq!(value.len(), role.len(), "parameter length does not match role");
        let grad = vec![0.0; value.len()];
        Param {
            name: name.into(),
            role,
            value,
            grad,
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Non-trainable state such as batch-norm running statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Buffer {
    pub name: String,
    pub value: Vec<f32>,
}
