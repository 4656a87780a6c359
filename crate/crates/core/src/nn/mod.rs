//! Small dense numeric kernel for the map-prediction networks: tensors,
//! strided convolutions with hand-written backward passes, activations,
//! losses and an Adam optimizer.

mod activation;
mod adam;
mod concat;
mod conv;
mod gradcheck;
mod loss;
mod tensor;

pub use activation::{
    leaky_relu, leaky_relu_backward, relu, relu_backward, sigmoid, sigmoid_backward, tanh, tanh_backward, LEAKY_SLOPE,
};
pub use adam::{AdamConfig, AdamState};
pub use concat::{concat_channels, split_channels};
pub use conv::{Conv2d, ConvGrads, ConvTranspose2d, KERNEL};
pub use gradcheck::grad_check;
pub use loss::{bce, gan_d_loss, gan_g_loss, l1, mse, Loss, PROB_EPS};
pub use tensor::{Scalar, Tensor};

/// Standard deviation of the Gaussian weight initialization.
pub const INIT_STD: f64 = 0.02;
