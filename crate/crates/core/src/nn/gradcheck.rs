//! Central finite-difference verification of analytic gradients.

use super::tensor::Tensor;

/// Worst per-element relative error between the analytic gradient returned
/// by `f` at `x` and central differences of its value.
///
/// The relative error of an element is `|a - n| / max(|a|, |n|, floor)`,
/// where `floor = max(1e-8, 1e-3 * max_j |n_j|)` keeps elements whose true
/// gradient is near zero from dominating through roundoff alone.
pub fn grad_check<F>(mut f: F, x: &Tensor<f64>, eps: f64) -> f64
where
    F: FnMut(&Tensor<f64>) -> (f64, Tensor<f64>),
{
    let (_, analytic) = f(x);
    assert_eq!(analytic.shape(), x.shape(), "gradient shape must match input");
    let mut probe = x.clone();
    let numeric: Vec<f64> = (0..x.len())
        .map(|i| {
            let orig = probe.data()[i];
            probe.data_mut()[i] = orig + eps;
            let (plus, _) = f(&probe);
            probe.data_mut()[i] = orig - eps;
            let (minus, _) = f(&probe);
            probe.data_mut()[i] = orig;
            (plus - minus) / (2.0 * eps)
        })
        .collect();
    let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (1e-3 * scale).max(1e-8);
    analytic
        .data()
        .iter()
        .zip(&numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}
