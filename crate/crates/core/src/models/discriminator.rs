//! Patch discriminator: scores (condition, candidate) map pairs on a grid
//! of overlapping patches.

use rand::Rng;

use crate::nn::{
    concat_channels, leaky_relu, leaky_relu_backward, sigmoid, split_channels, Conv2d, Scalar, Tensor, INIT_STD,
    LEAKY_SLOPE,
};
use crate::{Error, Result};

/// Strided blocks before the scoring convolution.
pub const BLOCKS: usize = 3;

pub struct DiscCache<T> {
    inputs: Vec<Tensor<T>>,
    hidden: Vec<Tensor<T>>,
    pub output: Tensor<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator<T> {
    pub layers: Vec<Conv2d<T>>,
    /// Same centering as the generator input.
    pub input_gain: f64,
}

impl<T: Scalar> Discriminator<T> {
    pub fn new<R: Rng + ?Sized>(base_channels: usize, input_gain: f64, rng: &mut R) -> Result<Self> {
        if base_channels == 0 {
            return Err(Error::Config("discriminator: base_channels must be positive".into()));
        }
        let mut layers = Vec::with_capacity(BLOCKS + 1);
        let mut c_in = 2;
        for i in 0..BLOCKS {
            let c_out = base_channels << i;
            layers.push(Conv2d::init(c_in, c_out, INIT_STD, rng));
            c_in = c_out;
        }
        layers.push(Conv2d::init(c_in, 1, INIT_STD, rng));
        Ok(Self { layers, input_gain })
    }

    /// Score map for probability maps `cond` and `cand`, both `(n, 1, h, w)`.
    pub fn forward(&self, cond: &Tensor<T>, cand: &Tensor<T>) -> Result<DiscCache<T>> {
        let half = T::of(0.5);
        let gain = T::of(self.input_gain);
        let x = concat_channels(&cond.map(|v| (v - half) * gain), &cand.map(|v| (v - half) * gain))?;
        let (_, _, h, w) = x.dims4()?;
        let s = 1 << self.layers.len();
        if h % s != 0 || w % s != 0 || h / s < 2 || w / s < 2 {
            return Err(Error::ShapeMismatch(format!(
                "discriminator needs sides divisible by {s} with at least 2x2 patches, got {h}x{w}"
            )));
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut hidden = Vec::with_capacity(BLOCKS);
        let mut cur = x;
        for (i, layer) in self.layers.iter().enumerate() {
            let y = layer.forward(&cur)?;
            inputs.push(cur);
            if i + 1 < self.layers.len() {
                cur = leaky_relu(&y, LEAKY_SLOPE);
                hidden.push(cur.clone());
            } else {
                cur = sigmoid(&y);
            }
        }
        Ok(DiscCache { inputs, hidden, output: cur })
    }

    /// Parameter gradients in [`Discriminator::params`] order, plus the
    /// gradient w.r.t. the candidate map.
    pub fn backward(&self, cache: &DiscCache<T>, grad_out: &Tensor<T>) -> Result<(Vec<Tensor<T>>, Tensor<T>)> {
        let mut g = cache.output.zip_map(grad_out, |s, g| g * s * (T::one() - s))?;
        let mut grads = Vec::with_capacity(2 * self.layers.len());
        for i in (0..self.layers.len()).rev() {
            if i + 1 < self.layers.len() {
                g = leaky_relu_backward(&cache.hidden[i], &g, LEAKY_SLOPE)?;
            }
            let lg = self.layers[i].backward(&cache.inputs[i], &g)?;
            grads.push(lg.bias);
            grads.push(lg.weight);
            g = lg.input;
        }
        grads.reverse();
        let (_, mut g_cand) = split_channels(&g, 1)?;
        g_cand.scale(T::of(self.input_gain));
        Ok((grads, g_cand))
    }

    pub fn params(&self) -> Vec<&Tensor<T>> {
        self.layers.iter().flat_map(|l| [&l.weight, &l.bias]).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        self.layers.iter_mut().flat_map(|l| [&mut l.weight, &mut l.bias]).collect()
    }
}
