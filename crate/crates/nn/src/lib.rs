//! A small CPU trainer for convolutional networks. [`network::Network`]
//! implements [`wevo::ParameterStore`] for `f32`, so a weight-evolution
//! engine can be attached to [`train::Trainer::hooks`].

pub mod checkpoint;
pub mod data;
pub mod layers;
pub mod models;
pub mod network;
pub mod optim;
pub mod param;
pub mod tensor;
pub mod train;

pub use data::Dataset;
pub use network::{Builder, Network, Node};
pub use optim::{MultiStepLr, Sgd};
pub use param::{Buffer, Param, ParamRole};
pub use tensor::Tensor;
pub use train::{EpochOutcome, Evaluation, TrainConfig, Trainer};
