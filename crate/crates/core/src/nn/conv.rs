//! Strided 4x4 convolutions (stride 2, padding 1) and their transposes.
//!
//! Both layers go through an im2col buffer and a GEMM. Samples in a batch
//! are processed in parallel; per-sample weight gradients are reduced in
//! sample order so results do not depend on the thread count.

use rand::Rng;
use rayon::prelude::*;

use super::tensor::{gemm, Mat, Scalar, Tensor};
use crate::{Error, Result};

pub const KERNEL: usize = 4;
const KK: usize = KERNEL * KERNEL;

/// Unfold a (C, H, W) image into a (C*16, OH*OW) patch matrix for the
/// stride-2, pad-1, 4x4 kernel, where OH = H/2 and OW = W/2.
fn im2col<T: Scalar>(x: &[T], c: usize, h: usize, w: usize, cols: &mut [T]) {
    let (oh, ow) = (h / 2, w / 2);
    let ohw = oh * ow;
    for ch in 0..c {
        let plane = &x[ch * h * w..(ch + 1) * h * w];
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = &mut cols[((ch * KERNEL + ky) * KERNEL + kx) * ohw..][..ohw];
                for oy in 0..oh {
                    let iy = (2 * oy + ky) as isize - 1;
                    let dst = &mut row[oy * ow..(oy + 1) * ow];
                    if iy < 0 || iy >= h as isize {
                        dst.fill(T::zero());
                        continue;
                    }
                    let src = &plane[iy as usize * w..(iy as usize + 1) * w];
                    for (ox, d) in dst.iter_mut().enumerate() {
                        let ix = (2 * ox + kx) as isize - 1;
                        *d = if ix < 0 || ix >= w as isize {
                            T::zero()
                        } else {
                            src[ix as usize]
                        };
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatter-add a patch matrix into a (C, H, W) image.
fn col2im<T: Scalar>(cols: &[T], c: usize, h: usize, w: usize, x: &mut [T]) {
    let (oh, ow) = (h / 2, w / 2);
    let ohw = oh * ow;
    x.fill(T::zero());
    for ch in 0..c {
        let plane = &mut x[ch * h * w..(ch + 1) * h * w];
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = &cols[((ch * KERNEL + ky) * KERNEL + kx) * ohw..][..ohw];
                for oy in 0..oh {
                    let iy = (2 * oy + ky) as isize - 1;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let dst = &mut plane[iy as usize * w..(iy as usize + 1) * w];
                    for (ox, &v) in row[oy * ow..(oy + 1) * ow].iter().enumerate() {
                        let ix = (2 * ox + kx) as isize - 1;
                        if ix >= 0 && ix < w as isize {
                            dst[ix as usize] = dst[ix as usize] + v;
                        }
                    }
                }
            }
        }
    }
}

/// Gradients of a convolution layer.
#[derive(Debug, Clone)]
pub struct ConvGrads<T> {
    pub input: Tensor<T>,
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

fn reduce_grads<T: Scalar>(
    parts: Vec<(Vec<T>, Vec<T>, Vec<T>)>,
    input_shape: &[usize],
    weight_shape: &[usize],
    bias_len: usize,
) -> Result<ConvGrads<T>> {
    let mut gx = Vec::with_capacity(input_shape.iter().product());
    let mut gw = vec![T::zero(); weight_shape.iter().product()];
    let mut gb = vec![T::zero(); bias_len];
    for (x, w, b) in parts {
        gx.extend_from_slice(&x);
        for (a, v) in gw.iter_mut().zip(w) {
            *a = *a + v;
        }
        for (a, v) in gb.iter_mut().zip(b) {
            *a = *a + v;
        }
    }
    Ok(ConvGrads {
        input: Tensor::from_vec(input_shape, gx)?,
        weight: Tensor::from_vec(weight_shape, gw)?,
        bias: Tensor::from_vec(&[bias_len], gb)?,
    })
}

/// Downsampling convolution. Weights are `(out_ch, in_ch, 4, 4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Scalar> Conv2d<T> {
    /// Gaussian weights with the given std, zero bias.
    pub fn init<R: Rng + ?Sized>(in_ch: usize, out_ch: usize, std: f64, rng: &mut R) -> Self {
        Self {
            weight: Tensor::randn(&[out_ch, in_ch, KERNEL, KERNEL], std, rng),
            bias: Tensor::zeros(&[out_ch]),
        }
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn out_channels(&self) -> usize {
        self.weight.shape()[0]
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<(usize, usize, usize, usize)> {
        let (n, c, h, w) = x.dims4()?;
        if c != self.in_channels() {
            return Err(Error::ShapeMismatch(format!(
                "conv2d expects {} input channels, got {c}",
                self.in_channels()
            )));
        }
        if h % 2 != 0 || w % 2 != 0 || h == 0 || w == 0 {
            return Err(Error::ShapeMismatch(format!("conv2d needs even spatial size, got {h}x{w}")));
        }
        Ok((n, c, h, w))
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (n, c, h, w) = self.check_input(x)?;
        let o = self.out_channels();
        let ohw = (h / 2) * (w / 2);
        let mut out = vec![T::zero(); n * o * ohw];
        out.par_chunks_mut(o * ohw).enumerate().for_each(|(i, dst)| {
            let mut cols = vec![T::zero(); c * KK * ohw];
            im2col(x.sample(i), c, h, w, &mut cols);
            for (ch, row) in dst.chunks_mut(ohw).enumerate() {
                row.fill(self.bias.data()[ch]);
            }
            gemm(Mat::new(self.weight.data(), o, c * KK), Mat::new(&cols, c * KK, ohw), T::one(), dst);
        });
        Tensor::from_vec(&[n, o, h / 2, w / 2], out)
    }

    pub fn backward(&self, x: &Tensor<T>, grad_out: &Tensor<T>) -> Result<ConvGrads<T>> {
        let (n, c, h, w) = self.check_input(x)?;
        let o = self.out_channels();
        let ohw = (h / 2) * (w / 2);
        if grad_out.shape() != [n, o, h / 2, w / 2] {
            return Err(Error::ShapeMismatch(format!("conv2d grad shape {:?}", grad_out.shape())));
        }
        let parts: Vec<_> = (0..n)
            .into_par_iter()
            .map(|i| {
                let g = grad_out.sample(i);
                let mut cols = vec![T::zero(); c * KK * ohw];
                im2col(x.sample(i), c, h, w, &mut cols);
                let mut gw = vec![T::zero(); o * c * KK];
                gemm(Mat::new(g, o, ohw), Mat::new(&cols, c * KK, ohw).t(), T::zero(), &mut gw);
                let gb: Vec<T> = g.chunks(ohw).map(|r| r.iter().copied().sum()).collect();
                gemm(Mat::new(self.weight.data(), o, c * KK).t(), Mat::new(g, o, ohw), T::zero(), &mut cols);
                let mut gx = vec![T::zero(); c * h * w];
                col2im(&cols, c, h, w, &mut gx);
                (gx, gw, gb)
            })
            .collect();
        reduce_grads(parts, x.shape(), self.weight.shape(), o)
    }
}

/// Upsampling transposed convolution. Weights are `(in_ch, out_ch, 4, 4)`;
/// with bias zero the forward map is the adjoint of [`Conv2d::forward`]'s
/// input map for a `Conv2d` with the same weight array.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvTranspose2d<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Scalar> ConvTranspose2d<T> {
    pub fn init<R: Rng + ?Sized>(in_ch: usize, out_ch: usize, std: f64, rng: &mut R) -> Self {
        Self {
            weight: Tensor::randn(&[in_ch, out_ch, KERNEL, KERNEL], std, rng),
            bias: Tensor::zeros(&[out_ch]),
        }
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn out_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<(usize, usize, usize, usize)> {
        let (n, c, h, w) = x.dims4()?;
        if c != self.in_channels() {
            return Err(Error::ShapeMismatch(format!(
                "conv_transpose2d expects {} input channels, got {c}",
                self.in_channels()
            )));
        }
        if h == 0 || w == 0 {
            return Err(Error::ShapeMismatch("conv_transpose2d: empty input".into()));
        }
        Ok((n, c, h, w))
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (n, c, h, w) = self.check_input(x)?;
        let o = self.out_channels();
        let (oh, ow) = (2 * h, 2 * w);
        let mut out = vec![T::zero(); n * o * oh * ow];
        out.par_chunks_mut(o * oh * ow).enumerate().for_each(|(i, dst)| {
            let mut cols = vec![T::zero(); o * KK * h * w];
            gemm(Mat::new(self.weight.data(), c, o * KK).t(), Mat::new(x.sample(i), c, h * w), T::zero(), &mut cols);
            col2im(&cols, o, oh, ow, dst);
            for (ch, plane) in dst.chunks_mut(oh * ow).enumerate() {
                let b = self.bias.data()[ch];
                for v in plane {
                    *v = *v + b;
                }
            }
        });
        Tensor::from_vec(&[n, o, oh, ow], out)
    }

    pub fn backward(&self, x: &Tensor<T>, grad_out: &Tensor<T>) -> Result<ConvGrads<T>> {
        let (n, c, h, w) = self.check_input(x)?;
        let o = self.out_channels();
        let (oh, ow) = (2 * h, 2 * w);
        if grad_out.shape() != [n, o, oh, ow] {
            return Err(Error::ShapeMismatch(format!(
                "conv_transpose2d grad shape {:?}",
                grad_out.shape()
            )));
        }
        let parts: Vec<_> = (0..n)
            .into_par_iter()
            .map(|i| {
                let g = grad_out.sample(i);
                let mut gcols = vec![T::zero(); o * KK * h * w];
                im2col(g, o, oh, ow, &mut gcols);
                let mut gx = vec![T::zero(); c * h * w];
                gemm(Mat::new(self.weight.data(), c, o * KK), Mat::new(&gcols, o * KK, h * w), T::zero(), &mut gx);
                let mut gw = vec![T::zero(); c * o * KK];
                gemm(Mat::new(x.sample(i), c, h * w), Mat::new(&gcols, o * KK, h * w).t(), T::zero(), &mut gw);
                let gb: Vec<T> = g.chunks(oh * ow).map(|r| r.iter().copied().sum()).collect();
                (gx, gw, gb)
            })
            .collect();
        reduce_grads(parts, x.shape(), self.weight.shape(), o)
    }
}
