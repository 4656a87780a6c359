//! Scalar losses averaged over all elements, each returning the value and
//! the gradient with respect to the prediction.

use super::tensor::{Scalar, Tensor};
use crate::Result;

/// Probabilities entering a log are clamped to `[EPS, 1 - EPS]`.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct Loss<T> {
    pub value: T,
    pub grad: Tensor<T>,
}

fn clamp<T: Scalar>(p: T) -> (T, bool) {
    let lo = T::of(PROB_EPS);
    let hi = T::one() - lo;
    if p < lo {
        (lo, false)
    } else if p > hi {
        (hi, false)
    } else {
        (p, true)
    }
}

fn count<T: Scalar>(t: &Tensor<T>) -> T {
    T::of(t.len() as f64)
}

/// Mean of `-[t ln p + (1 - t) ln(1 - p)]`.
pub fn bce<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<Loss<T>> {
    pred.same_shape(target)?;
    let n = count(pred);
    let mut value = T::zero();
    let grad = pred.zip_map(target, |p, t| {
        let (pc, inside) = clamp(p);
        value = value - (t * pc.ln() + (T::one() - t) * (T::one() - pc).ln());
        if inside {
            (pc - t) / (pc * (T::one() - pc)) / n
        } else {
            T::zero()
        }
    })?;
    Ok(Loss { value: value / n, grad })
}

pub fn mse<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<Loss<T>> {
    pred.same_shape(target)?;
    let n = count(pred);
    let mut value = T::zero();
    let grad = pred.zip_map(target, |p, t| {
        let d = p - t;
        value = value + d * d;
        T::of(2.0) * d / n
    })?;
    Ok(Loss { value: value / n, grad })
}

pub fn l1<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<Loss<T>> {
    pred.same_shape(target)?;
    let n = count(pred);
    let mut value = T::zero();
    let grad = pred.zip_map(target, |p, t| {
        let d = p - t;
        value = value + d.abs();
        if d > T::zero() {
            T::one() / n
        } else if d < T::zero() {
            -T::one() / n
        } else {
            T::zero()
        }
    })?;
    Ok(Loss { value: value / n, grad })
}

/// Discriminator loss `-mean[ln D(real) + ln(1 - D(fake))]`, with gradients
/// for both score maps. Each term is averaged over its own elements.
pub fn gan_d_loss<T: Scalar>(d_real: &Tensor<T>, d_fake: &Tensor<T>) -> Result<(T, Tensor<T>, Tensor<T>)> {
    d_real.same_shape(d_fake)?;
    let n = count(d_real);
    let mut value = T::zero();
    let g_real = d_real.map(|p| {
        let (pc, inside) = clamp(p);
        value = value - pc.ln();
        if inside {
            -T::one() / (pc * n)
        } else {
            T::zero()
        }
    });
    let g_fake = d_fake.map(|p| {
        let (pc, inside) = clamp(p);
        value = value - (T::one() - pc).ln();
        if inside {
            T::one() / ((T::one() - pc) * n)
        } else {
            T::zero()
        }
    });
    Ok((value / n, g_real, g_fake))
}

/// Non-saturating generator loss `-mean[ln D(fake)]`.
pub fn gan_g_loss<T: Scalar>(d_fake: &Tensor<T>) -> Loss<T> {
    let n = count(d_fake);
    let mut value = T::zero();
    let grad = d_fake.map(|p| {
        let (pc, inside) = clamp(p);
        value = value - pc.ln();
        if inside {
            -T::one() / (pc * n)
        } else {
            T::zero()
        }
    });
    Loss { value: value / n, grad }
}
