//! Small `f64` neural network kernel: dense, valid convolution and pooling
//! layers over channel-last tensors, elementwise activations, softmax, MSE and
//! Huber losses, SGD and Adam.
//!
//! Networks process one sample at a time. Gradients accumulate across
//! `backward` calls until `zero_grad`, so a minibatch is a loop of
//! forward/backward followed by one optimizer step.

mod activation;
mod layer;
mod loss;
mod network;
mod optim;
mod tensor;

pub use activation::{activate, softmax, Activation};
pub use layer::{conv_output_size, Layer, LayerSpec};
pub use loss::LossSpec;
pub use network::{param_count, Network, NetworkSpec};
pub use optim::{Optimizer, OptimizerSpec};
pub use tensor::{argmax, Tensor};
