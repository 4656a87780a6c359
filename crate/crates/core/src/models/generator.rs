//! Five-block encoder-decoder generator with skip connections.
//!
//! Probabilities enter centered and scaled, `x = (p - 0.5) * input_gain`,
//! and leave through `p = sigmoid(logit_scale * z)`, so that the narrow
//! probability band produced by clipped log-odds maps onto unit-scale
//! activations.

use rand::Rng;

use crate::nn::{
    concat_channels, leaky_relu, leaky_relu_backward, relu, relu_backward, split_channels, Conv2d, ConvTranspose2d,
    Scalar, Tensor, INIT_STD, LEAKY_SLOPE,
};
use crate::occupancy::OccupancyConfig;
use crate::{Error, Result};

pub const DEPTH: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorArch {
    pub base_channels: usize,
    pub input_gain: f64,
    pub logit_scale: f64,
}

impl GeneratorArch {
    /// Scaling matched to the largest log-odds magnitude of `occ`.
    pub fn for_occupancy(base_channels: usize, occ: &OccupancyConfig) -> Self {
        let l = f64::from(occ.max_logodds());
        let p_max = 1.0 / (1.0 + (-l).exp());
        Self {
            base_channels,
            input_gain: 1.0 / (p_max - 0.5),
            logit_scale: l,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_channels == 0 {
            return Err(Error::Config("generator: base_channels must be positive".into()));
        }
        if !(self.input_gain > 0.0 && self.logit_scale > 0.0) {
            return Err(Error::Config("generator: input_gain and logit_scale must be positive".into()));
        }
        Ok(())
    }

    /// Output channels of encoder block `i`.
    pub fn channels(&self, i: usize) -> usize {
        (self.base_channels << i).min(8 * self.base_channels)
    }

    /// Inputs must be divisible by this.
    pub fn stride(&self) -> usize {
        1 << DEPTH
    }
}

/// Everything the backward pass needs from a forward pass.
pub struct GenCache<T> {
    x: Tensor<T>,
    enc: Vec<Tensor<T>>,
    /// Inputs to decoder blocks.
    dec_in: Vec<Tensor<T>>,
    /// Outputs of decoder blocks except the last.
    dec_out: Vec<Tensor<T>>,
    pub output: Tensor<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator<T> {
    pub arch: GeneratorArch,
    pub enc: Vec<Conv2d<T>>,
    pub dec: Vec<ConvTranspose2d<T>>,
}

impl<T: Scalar> Generator<T> {
    pub fn new<R: Rng + ?Sized>(arch: GeneratorArch, rng: &mut R) -> Result<Self> {
        Self::with_init_std(arch, INIT_STD, rng)
    }

    pub fn with_init_std<R: Rng + ?Sized>(arch: GeneratorArch, std: f64, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let c = |i| arch.channels(i);
        let enc = (0..DEPTH)
            .map(|i| Conv2d::init(if i == 0 { 1 } else { c(i - 1) }, c(i), std, rng))
            .collect();
        // decoder block j produces the resolution of encoder block DEPTH-2-j
        let dec = (0..DEPTH)
            .map(|j| {
                let level = DEPTH - 1 - j;
                let inp = if j == 0 { c(level) } else { 2 * c(level) };
                let out = if level == 0 { 1 } else { c(level - 1) };
                ConvTranspose2d::init(inp, out, std, rng)
            })
            .collect();
        Ok(Self { arch, enc, dec })
    }

    pub fn check_input(&self, p: &Tensor<T>) -> Result<()> {
        let (_, c, h, w) = p.dims4()?;
        let s = self.arch.stride();
        if c != 1 || h % s != 0 || w % s != 0 || h == 0 || w == 0 {
            return Err(Error::ShapeMismatch(format!(
                "generator needs (n, 1, h, w) with h, w divisible by {s}, got {:?}",
                p.shape()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, p: &Tensor<T>) -> Result<GenCache<T>> {
        self.check_input(p)?;
        let half = T::of(0.5);
        let gain = T::of(self.arch.input_gain);
        let x = p.map(|v| (v - half) * gain);
        let mut enc = Vec::with_capacity(DEPTH);
        for (i, layer) in self.enc.iter().enumerate() {
            let inp = if i == 0 { &x } else { &enc[i - 1] };
            enc.push(leaky_relu(&layer.forward(inp)?, LEAKY_SLOPE));
        }
        let mut dec_in = Vec::with_capacity(DEPTH);
        let mut dec_out: Vec<Tensor<T>> = Vec::with_capacity(DEPTH - 1);
        let mut z = None;
        for (j, layer) in self.dec.iter().enumerate() {
            let inp = if j == 0 {
                enc[DEPTH - 1].clone()
            } else {
                concat_channels(&dec_out[j - 1], &enc[DEPTH - 1 - j])?
            };
            let y = layer.forward(&inp)?;
            dec_in.push(inp);
            if j + 1 < DEPTH {
                dec_out.push(relu(&y));
            } else {
                z = Some(y);
            }
        }
        let scale = T::of(self.arch.logit_scale);
        let output = z
            .expect("decoder has DEPTH blocks")
            .map(|v| T::one() / (T::one() + (-(v * scale)).exp()));
        Ok(GenCache { x, enc, dec_in, dec_out, output })
    }

    pub fn predict(&self, p: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.forward(p)?.output)
    }

    /// Parameter gradients (in [`Generator::params`] order) and the input
    /// gradient, given the gradient of a scalar loss w.r.t. the output.
    pub fn backward(&self, cache: &GenCache<T>, grad_out: &Tensor<T>) -> Result<(Vec<Tensor<T>>, Tensor<T>)> {
        cache.output.same_shape(grad_out)?;
        let scale = T::of(self.arch.logit_scale);
        let mut g = cache
            .output
            .zip_map(grad_out, |s, g| g * s * (T::one() - s) * scale)?;
        let mut enc_grads: Vec<Option<Tensor<T>>> = vec![None; DEPTH];
        let mut dec_grads = Vec::with_capacity(2 * DEPTH);
        for j in (0..DEPTH).rev() {
            if j + 1 < DEPTH {
                g = relu_backward(&cache.dec_out[j], &g)?;
            }
            let grads = self.dec[j].backward(&cache.dec_in[j], &g)?;
            dec_grads.push((j, grads.weight, grads.bias));
            if j == 0 {
                enc_grads[DEPTH - 1] = Some(grads.input);
                break;
            }
            let (g_prev, g_skip) = split_channels(&grads.input, self.dec[j - 1].out_channels())?;
            enc_grads[DEPTH - 1 - j] = Some(g_skip);
            g = g_prev;
        }
        let mut enc_param_grads = Vec::with_capacity(DEPTH);
        let mut carry: Option<Tensor<T>> = None;
        for i in (0..DEPTH).rev() {
            let mut ge = enc_grads[i].take().expect("every encoder level receives a gradient");
            if let Some(c) = carry.take() {
                ge.add_assign(&c)?;
            }
            let ge = leaky_relu_backward(&cache.enc[i], &ge, LEAKY_SLOPE)?;
            let inp = if i == 0 { &cache.x } else { &cache.enc[i - 1] };
            let grads = self.enc[i].backward(inp, &ge)?;
            enc_param_grads.push((i, grads.weight, grads.bias));
            carry = Some(grads.input);
        }
        let mut gx = carry.expect("encoder is non-empty");
        gx.scale(T::of(self.arch.input_gain));

        let mut out = Vec::with_capacity(4 * DEPTH);
        enc_param_grads.sort_by_key(|(i, _, _)| *i);
        for (_, w, b) in enc_param_grads {
            out.push(w);
            out.push(b);
        }
        dec_grads.sort_by_key(|(j, _, _)| *j);
        for (_, w, b) in dec_grads {
            out.push(w);
            out.push(b);
        }
        Ok((out, gx))
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for i in 0..self.enc.len() {
            names.push(format!("enc{i}.weight"));
            names.push(format!("enc{i}.bias"));
        }
        for j in 0..self.dec.len() {
            names.push(format!("dec{j}.weight"));
            names.push(format!("dec{j}.bias"));
        }
        names
    }

    pub fn params(&self) -> Vec<&Tensor<T>> {
        let mut v = Vec::new();
        for l in &self.enc {
            v.push(&l.weight);
            v.push(&l.bias);
        }
        for l in &self.dec {
            v.push(&l.weight);
            v.push(&l.bias);
        }
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        let mut v = Vec::new();
        for l in &mut self.enc {
            v.push(&mut l.weight);
            v.push(&mut l.bias);
        }
        for l in &mut self.dec {
            v.push(&mut l.weight);
            v.push(&mut l.bias);
        }
        v
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|t| t.len()).sum()
    }

    pub fn cast<U: Scalar>(&self) -> Generator<U> {
        Generator {
            arch: self.arch,
            enc: self
                .enc
                .iter()
                .map(|l| Conv2d { weight: l.weight.cast(), bias: l.bias.cast() })
                .collect(),
            dec: self
                .dec
                .iter()
                .map(|l| ConvTranspose2d { weight: l.weight.cast(), bias: l.bias.cast() })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn arch() -> GeneratorArch {
        GeneratorArch::for_occupancy(4, &OccupancyConfig::default())
    }

    #[test]
    fn channel_schedule_caps_at_eight_times_base() {
        let a = GeneratorArch { base_channels: 16, ..arch() };
        let c: Vec<usize> = (0..DEPTH).map(|i| a.channels(i)).collect();
        assert_eq!(c, [16, 32, 64, 128, 128]);
    }

    #[test]
    fn default_scaling() {
        let a = arch();
        assert!((a.logit_scale - 0.1).abs() < 1e-7);
        // sigmoid(0.1) - 0.5 = 0.02498...
        assert!((a.input_gain - 40.03).abs() < 0.01, "{}", a.input_gain);
    }

    #[test]
    fn shape_is_preserved() {
        let g = Generator::<f32>::new(arch(), &mut seeded(1, 10)).unwrap();
        let x = Tensor::full(&[2, 1, 64, 64], 0.5);
        assert_eq!(g.predict(&x).unwrap().shape(), [2, 1, 64, 64]);
        assert!(g.predict(&Tensor::full(&[1, 1, 48, 48], 0.5)).is_err());
        assert!(g.predict(&Tensor::full(&[1, 2, 64, 64], 0.5)).is_err());
        assert_eq!(g.params().len(), g.param_names().len());
    }
}
