//! Elementwise activations. Backward functions take the upstream gradient
//! and whichever of input or output the derivative is cheapest in.

use super::tensor::{Scalar, Tensor};
use crate::Result;

pub const LEAKY_SLOPE: f64 = 0.2;

pub fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| v.max(T::zero()))
}

pub fn relu_backward<T: Scalar>(x: &Tensor<T>, grad: &Tensor<T>) -> Result<Tensor<T>> {
    x.zip_map(grad, |v, g| if v > T::zero() { g } else { T::zero() })
}

pub fn leaky_relu<T: Scalar>(x: &Tensor<T>, slope: f64) -> Tensor<T> {
    let s = T::of(slope);
    x.map(|v| if v > T::zero() { v } else { v * s })
}

pub fn leaky_relu_backward<T: Scalar>(x: &Tensor<T>, grad: &Tensor<T>, slope: f64) -> Result<Tensor<T>> {
    let s = T::of(slope);
    x.zip_map(grad, |v, g| if v > T::zero() { g } else { g * s })
}

pub fn sigmoid<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| T::one() / (T::one() + (-v).exp()))
}

/// Takes the sigmoid *output*.
pub fn sigmoid_backward<T: Scalar>(y: &Tensor<T>, grad: &Tensor<T>) -> Result<Tensor<T>> {
    y.zip_map(grad, |s, g| g * s * (T::one() - s))
}

pub fn tanh<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| v.tanh())
}

/// Takes the tanh *output*.
pub fn tanh_backward<T: Scalar>(y: &Tensor<T>, grad: &Tensor<T>) -> Result<Tensor<T>> {
    y.zip_map(grad, |t, g| g * (T::one() - t * t))
}
