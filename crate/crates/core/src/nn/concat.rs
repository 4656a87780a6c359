use super::tensor::{Scalar, Tensor};
use crate::{Error, Result};

/// Concatenate two `(n, c, h, w)` tensors along the channel axis.
pub fn concat_channels<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let (n, ca, h, w) = a.dims4()?;
    let (nb, cb, hb, wb) = b.dims4()?;
    if (n, h, w) != (nb, hb, wb) {
        return Err(Error::ShapeMismatch(format!(
            "concat: {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mut data = Vec::with_capacity(a.len() + b.len());
    for i in 0..n {
        data.extend_from_slice(a.sample(i));
        data.extend_from_slice(b.sample(i));
    }
    Tensor::from_vec(&[n, ca + cb, h, w], data)
}

/// Backward of [`concat_channels`]: split a gradient into the first
/// `first_channels` channels and the rest.
pub fn split_channels<T: Scalar>(g: &Tensor<T>, first_channels: usize) -> Result<(Tensor<T>, Tensor<T>)> {
    let (n, c, h, w) = g.dims4()?;
    if first_channels > c {
        return Err(Error::ShapeMismatch(format!("split: {first_channels} of {c} channels")));
    }
    let cut = first_channels * h * w;
    let mut a = Vec::with_capacity(n * cut);
    let mut b = Vec::with_capacity(g.len() - n * cut);
    for i in 0..n {
        let s = g.sample(i);
        a.extend_from_slice(&s[..cut]);
        b.extend_from_slice(&s[cut..]);
    }
    Ok((
        Tensor::from_vec(&[n, first_channels, h, w], a)?,
        Tensor::from_vec(&[n, c - first_channels, h, w], b)?,
    ))
}
