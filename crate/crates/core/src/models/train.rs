//! Training loops for the supervised regime (BCE, MSE or L1 against the
//! fused target) and the adversarial regime (patch discriminator plus
//! lambda-weighted L1).

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::discriminator::Discriminator;
use super::generator::{Generator, GeneratorArch};
use crate::dataset::SamplePair;
use crate::nn::{bce, gan_d_loss, gan_g_loss, l1, mse, AdamConfig, AdamState, Loss, Tensor};
use crate::occupancy::OccupancyConfig;
use crate::rng::{seeded, streams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredLoss {
    Bce,
    Mse,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pred(PredLoss),
    Gan,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pred(PredLoss::Bce) => "pred-bce",
            Method::Pred(PredLoss::Mse) => "pred-mse",
            Method::Pred(PredLoss::L1) => "pred-l1",
            Method::Gan => "gan",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pred-bce" => Method::Pred(PredLoss::Bce),
            "pred-mse" => Method::Pred(PredLoss::Mse),
            "pred-l1" => Method::Pred(PredLoss::L1),
            "gan" => Method::Gan,
            _ => return Err(Error::InvalidArgument(format!("unknown training method {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub base_channels: usize,
    pub lambda_l1: f64,
    pub batch_size_gan: usize,
    pub batch_size_pred: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping; 0 disables.
    pub patience: usize,
    /// Hard cap on optimizer steps; 0 means no cap.
    pub max_iterations: usize,
    pub val_fraction: f64,
    pub seed: u64,
    pub pred_loss: PredLoss,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            base_channels: 16,
            lambda_l1: 10.0,
            batch_size_gan: 4,
            batch_size_pred: 16,
            max_epochs: 300,
            patience: 10,
            max_iterations: 0,
            val_fraction: 0.1,
            seed: 0,
            pred_loss: PredLoss::Bce,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base_channels == 0 || self.batch_size_gan == 0 || self.batch_size_pred == 0 || self.max_epochs == 0 {
            return Err(Error::Config("train: sizes and epochs must be positive".into()));
        }
        if !(self.lambda_l1 > 0.0) {
            return Err(Error::Config("train: lambda_l1 must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::Config("train: val_fraction must be in [0, 1)".into()));
        }
        let a = &self.adam;
        if !(a.lr > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.epsilon > 0.0) {
            return Err(Error::Config("train: invalid optimizer settings".into()));
        }
        Ok(())
    }

    pub fn arch(&self, occ: &OccupancyConfig) -> GeneratorArch {
        GeneratorArch::for_occupancy(self.base_channels, occ)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// Objective minimized by the generator step.
    pub loss: f64,
    /// Mean absolute error between output and target.
    pub l1: f64,
    pub d_loss: Option<f64>,
    /// Range of discriminator outputs seen in this iteration.
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_l1: f64,
    pub val_l1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxEpochs,
    MaxIterations,
    EarlyStopping,
}

#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub iterations: Vec<IterationRecord>,
    pub epochs: Vec<EpochRecord>,
    pub stop: StopReason,
    /// Epoch whose weights were kept, when validation data was available.
    pub best_epoch: Option<usize>,
}

impl History {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "stop = {:?}", self.stop);
        match self.best_epoch {
            Some(e) => {
                let _ = writeln!(s, "best_epoch = {e}");
            }
            None => s.push_str("best_epoch = none\n"),
        }
        s.push_str("epoch train_loss train_l1 val_l1\n");
        for e in &self.epochs {
            let val = e.val_l1.map_or("-".to_string(), |v| format!("{v:.6e}"));
            let _ = writeln!(s, "{} {:.6e} {:.6e} {}", e.epoch, e.train_loss, e.train_l1, val);
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub generator: Generator<f32>,
    pub history: History,
}

/// Stack grids of the given pairs into `(n, 1, h, w)` input and target tensors.
pub fn to_tensors(pairs: &[SamplePair], idx: &[usize]) -> Result<(Tensor<f32>, Tensor<f32>)> {
    let first = pairs.get(*idx.first().ok_or(Error::EmptyDataset)?).ok_or(Error::EmptyDataset)?;
    let res = first.input.spec.resolution;
    let mut x = Vec::with_capacity(idx.len() * res * res);
    let mut y = Vec::with_capacity(idx.len() * res * res);
    for &i in idx {
        let p = &pairs[i];
        if p.input.spec != first.input.spec || p.target.spec != first.input.spec {
            return Err(Error::ShapeMismatch("pairs with different grid specs".into()));
        }
        x.extend_from_slice(&p.input.values);
        y.extend_from_slice(&p.target.values);
    }
    let shape = [idx.len(), 1, res, res];
    Ok((Tensor::from_vec(&shape, x)?, Tensor::from_vec(&shape, y)?))
}

/// Seeded `(train, validation)` split of a pair list.
pub fn split_validation(pairs: &[SamplePair], fraction: f64, seed: u64) -> (Vec<SamplePair>, Vec<SamplePair>) {
    let mut idx: Vec<usize> = (0..pairs.len()).collect();
    idx.shuffle(&mut seeded(seed, streams::VALIDATION_SPLIT));
    let n_val = ((pairs.len() as f64 * fraction).round() as usize).min(pairs.len().saturating_sub(1));
    let (val, train) = idx.split_at(n_val);
    let mut train = train.to_vec();
    let mut val = val.to_vec();
    train.sort_unstable();
    val.sort_unstable();
    (
        train.iter().map(|&i| pairs[i].clone()).collect(),
        val.iter().map(|&i| pairs[i].clone()).collect(),
    )
}

/// Mean absolute error of the generator over a pair list.
pub fn mean_l1(g: &Generator<f32>, pairs: &[SamplePair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let idx: Vec<usize> = (0..pairs.len()).collect();
    let mut total = 0.0;
    let mut count = 0usize;
    for chunk in idx.chunks(32) {
        let (x, y) = to_tensors(pairs, chunk)?;
        let out = g.predict(&x)?;
        total += out
            .data()
            .iter()
            .zip(y.data())
            .map(|(a, b)| f64::from((a - b).abs()))
            .sum::<f64>();
        count += out.len();
    }
    Ok(total / count as f64)
}

fn check_finite(what: &str, it: usize, v: f64, grads: &[Tensor<f32>]) -> Result<()> {
    if !v.is_finite() || grads.iter().any(|g| !g.all_finite()) {
        return Err(Error::Numeric(format!("{what} became non-finite at iteration {it}")));
    }
    Ok(())
}

fn pred_loss(kind: PredLoss, out: &Tensor<f32>, y: &Tensor<f32>) -> Result<Loss<f32>> {
    match kind {
        PredLoss::Bce => bce(out, y),
        PredLoss::Mse => mse(out, y),
        PredLoss::L1 => l1(out, y),
    }
}

fn mean_abs_diff(a: &Tensor<f32>, b: &Tensor<f32>) -> f64 {
    let s: f64 = a.data().iter().zip(b.data()).map(|(p, q)| f64::from((p - q).abs())).sum();
    s / a.len() as f64
}

/// Epoch loop with shuffling, iteration cap and early stopping on
/// validation L1. `step` runs one optimizer step on a batch.
fn run_loop<F>(
    mut g: Generator<f32>,
    train: &[SamplePair],
    val: &[SamplePair],
    cfg: &TrainConfig,
    batch_size: usize,
    mut step: F,
) -> Result<TrainOutput>
where
    F: FnMut(&mut Generator<f32>, &Tensor<f32>, &Tensor<f32>, usize) -> Result<IterationRecord>,
{
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = seeded(cfg.seed, streams::SHUFFLE);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut iterations = Vec::new();
    let mut epochs = Vec::new();
    let mut best: Option<(f64, usize, Generator<f32>)> = None;
    let mut stale = 0;
    let mut stop = StopReason::MaxEpochs;
    'epochs: for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let start = iterations.len();
        let mut capped = false;
        for batch in order.chunks(batch_size) {
            if cfg.max_iterations > 0 && iterations.len() >= cfg.max_iterations {
                capped = true;
                break;
            }
            let (x, y) = to_tensors(train, batch)?;
            let rec = step(&mut g, &x, &y, iterations.len())?;
            iterations.push(rec);
        }
        let done = &iterations[start..];
        if !done.is_empty() {
            let n = done.len() as f64;
            let val_l1 = if val.is_empty() { None } else { Some(mean_l1(&g, val)?) };
            epochs.push(EpochRecord {
                epoch,
                train_loss: done.iter().map(|r| r.loss).sum::<f64>() / n,
                train_l1: done.iter().map(|r| r.l1).sum::<f64>() / n,
                val_l1,
            });
            if let Some(v) = val_l1 {
                if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                    best = Some((v, epoch, g.clone()));
                    stale = 0;
                } else {
                    stale += 1;
                }
                if cfg.patience > 0 && stale >= cfg.patience {
                    stop = StopReason::EarlyStopping;
                    break 'epochs;
                }
            }
        }
        if capped || (cfg.max_iterations > 0 && iterations.len() >= cfg.max_iterations) {
            stop = StopReason::MaxIterations;
            break;
        }
    }
    let best_epoch = best.as_ref().map(|(_, e, _)| *e);
    if let Some((_, _, bg)) = best {
        g = bg;
    }
    Ok(TrainOutput {
        generator: g,
        history: History { iterations, epochs, stop, best_epoch },
    })
}

pub fn init_generator(cfg: &TrainConfig, occ: &OccupancyConfig) -> Result<Generator<f32>> {
    Generator::new(cfg.arch(occ), &mut seeded(cfg.seed, streams::GENERATOR_INIT))
}

/// Supervised training with `cfg.pred_loss`.
pub fn train_pred(
    train: &[SamplePair],
    val: &[SamplePair],
    cfg: &TrainConfig,
    occ: &OccupancyConfig,
) -> Result<TrainOutput> {
    cfg.validate()?;
    let g = init_generator(cfg, occ)?;
    let mut opt = AdamState::new(cfg.adam, &g.params());
    let kind = cfg.pred_loss;
    run_loop(g, train, val, cfg, cfg.batch_size_pred, |g, x, y, it| {
        let cache = g.forward(x)?;
        let loss = pred_loss(kind, &cache.output, y)?;
        let (grads, _) = g.backward(&cache, &loss.grad)?;
        let value = f64::from(loss.value);
        check_finite("generator loss", it, value, &grads)?;
        opt.update(&mut g.params_mut(), &grads)?;
        Ok(IterationRecord {
            loss: value,
            l1: mean_abs_diff(&cache.output, y),
            d_loss: None,
            d_min: None,
            d_max: None,
        })
    })
}

fn range(t: &Tensor<f32>) -> (f64, f64) {
    t.data().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(f64::from(v)), hi.max(f64::from(v)))
    })
}

/// Adversarial training: per batch one discriminator step on real and
/// detached fake pairs, then one generator step on the non-saturating GAN
/// loss plus `lambda_l1` times L1.
pub fn train_gan(
    train: &[SamplePair],
    val: &[SamplePair],
    cfg: &TrainConfig,
    occ: &OccupancyConfig,
) -> Result<TrainOutput> {
    cfg.validate()?;
    let g = init_generator(cfg, occ)?;
    let mut d = Discriminator::<f32>::new(
        cfg.base_channels,
        g.arch.input_gain,
        &mut seeded(cfg.seed, streams::DISCRIMINATOR_INIT),
    )?;
    let mut opt_g = AdamState::new(cfg.adam, &g.params());
    let mut opt_d = AdamState::new(cfg.adam, &d.params());
    let lambda = cfg.lambda_l1 as f32;
    run_loop(g, train, val, cfg, cfg.batch_size_gan, |g, x, y, it| {
        let gc = g.forward(x)?;
        let fake = &gc.output;

        let real_c = d.forward(x, y)?;
        let fake_c = d.forward(x, fake)?;
        let (d_loss, g_real, g_fake) = gan_d_loss(&real_c.output, &fake_c.output)?;
        let (mut d_grads, _) = d.backward(&real_c, &g_real)?;
        let (d_grads_fake, _) = d.backward(&fake_c, &g_fake)?;
        for (a, b) in d_grads.iter_mut().zip(&d_grads_fake) {
            a.add_assign(b)?;
        }
        check_finite("discriminator loss", it, f64::from(d_loss), &d_grads)?;
        let (r0, r1) = range(&real_c.output);
        let (f0, f1) = range(&fake_c.output);
        opt_d.update(&mut d.params_mut(), &d_grads)?;

        let fake_c = d.forward(x, fake)?;
        let adv = gan_g_loss(&fake_c.output);
        let rec = l1(fake, y)?;
        let (_, mut g_out) = d.backward(&fake_c, &adv.grad)?;
        let mut g_l1 = rec.grad;
        g_l1.scale(lambda);
        g_out.add_assign(&g_l1)?;
        let (grads, _) = g.backward(&gc, &g_out)?;
        let value = f64::from(adv.value) + cfg.lambda_l1 * f64::from(rec.value);
        check_finite("generator loss", it, value, &grads)?;
        let (s0, s1) = range(&fake_c.output);
        opt_g.update(&mut g.params_mut(), &grads)?;
        Ok(IterationRecord {
            loss: value,
            l1: f64::from(rec.value),
            d_loss: Some(f64::from(d_loss)),
            d_min: Some(r0.min(f0).min(s0)),
            d_max: Some(r1.max(f1).max(s1)),
        })
    })
}

pub fn train(
    method: Method,
    train: &[SamplePair],
    val: &[SamplePair],
    cfg: &TrainConfig,
    occ: &OccupancyConfig,
) -> Result<TrainOutput> {
    match method {
        Method::Pred(kind) => train_pred(train, val, &TrainConfig { pred_loss: kind, ..cfg.clone() }, occ),
        Method::Gan => train_gan(train, val, cfg, occ),
    }
}
