//! Inpainting metrics and the overwrite rule that turns raw predictions
//! into the map used downstream.

use rayon::prelude::*;

use crate::dataset::SamplePair;
use crate::occupancy::{CellState, OccupancyConfig, ProbGrid};
use crate::{Error, Result};

pub const HISTOGRAM_BINS: usize = 20;

/// Anything that maps an input probability grid to a predicted one.
pub trait Predictor: Sync {
    fn predict(&self, input: &ProbGrid) -> Result<ProbGrid>;
}

/// Returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPredictor;

impl Predictor for IdentityPredictor {
    fn predict(&self, input: &ProbGrid) -> Result<ProbGrid> {
        Ok(input.clone())
    }
}

fn same_spec(a: &ProbGrid, b: &ProbGrid) -> Result<()> {
    if a.spec != b.spec || a.values.len() != b.values.len() {
        return Err(Error::ShapeMismatch(format!("grids {:?} and {:?}", a.spec, b.spec)));
    }
    Ok(())
}

/// Keep every known input cell; take `raw` elsewhere.
pub fn overwrite_known(input: &ProbGrid, raw: &ProbGrid, cfg: &OccupancyConfig) -> Result<ProbGrid> {
    same_spec(input, raw)?;
    let values = input
        .values
        .iter()
        .zip(&raw.values)
        .map(|(&i, &r)| if cfg.classify_prob(i).is_known() { i } else { r })
        .collect();
    Ok(ProbGrid { spec: input.spec, values })
}

pub fn predict_inpaint(p: &dyn Predictor, input: &ProbGrid, cfg: &OccupancyConfig) -> Result<ProbGrid> {
    let raw = p.predict(input)?;
    overwrite_known(input, &raw, cfg)
}

/// Fraction of jointly known cells whose free/occupied labels agree, or
/// `None` when no cell is known in both maps.
pub fn inpaint_accuracy(pred: &ProbGrid, target: &ProbGrid, cfg: &OccupancyConfig) -> Result<Option<f64>> {
    same_spec(pred, target)?;
    let (mut joint, mut agree) = (0usize, 0usize);
    for (&p, &t) in pred.values.iter().zip(&target.values) {
        let (a, b) = (cfg.classify_prob(p), cfg.classify_prob(t));
        if a != CellState::Unknown && b != CellState::Unknown {
            joint += 1;
            agree += usize::from(a == b);
        }
    }
    Ok((joint > 0).then(|| agree as f64 / joint as f64))
}

/// Percentage of cells unknown in `input` but known in `pred`, relative to
/// the number of known input cells. `None` without known input cells.
pub fn inpainted_fraction(input: &ProbGrid, pred: &ProbGrid, cfg: &OccupancyConfig) -> Result<Option<f64>> {
    same_spec(input, pred)?;
    let (mut known, mut gained) = (0usize, 0usize);
    for (&i, &p) in input.values.iter().zip(&pred.values) {
        if cfg.classify_prob(i).is_known() {
            known += 1;
        } else if cfg.classify_prob(p).is_known() {
            gained += 1;
        }
    }
    Ok((known > 0).then(|| 100.0 * gained as f64 / known as f64))
}

/// Counts in twenty 5%-wide bins over [0, 100]; 100 goes to the last bin.
/// Values are percentages.
pub fn accuracy_histogram(values: &[f64]) -> [usize; HISTOGRAM_BINS] {
    let mut bins = [0; HISTOGRAM_BINS];
    for &v in values {
        let b = ((v / 5.0).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1);
        bins[b] += 1;
    }
    bins
}

/// Per-pair means over a dataset, as reported by `eval-inpaint`.
#[derive(Debug, Clone, PartialEq)]
pub struct InpaintReport {
    pub n_pairs: usize,
    /// Accuracy of the raw prediction against the target.
    pub accuracy_pct: Option<f64>,
    pub inpainted_pct: Option<f64>,
    /// Inpainted fraction of the three-camera target itself.
    pub target_gain_pct: Option<f64>,
    /// Per-pair accuracies in 5% bins.
    pub histogram: [usize; HISTOGRAM_BINS],
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Pairs without a defined metric are left out of that metric's mean.
pub fn evaluate_inpainting(p: &dyn Predictor, pairs: &[SamplePair], cfg: &OccupancyConfig) -> Result<InpaintReport> {
    let per_pair = pairs
        .par_iter()
        .map(|pair| {
            let raw = p.predict(&pair.input)?;
            Ok((
                inpaint_accuracy(&raw, &pair.target, cfg)?.map(|a| 100.0 * a),
                inpainted_fraction(&pair.input, &raw, cfg)?,
                inpainted_fraction(&pair.input, &pair.target, cfg)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let acc: Vec<f64> = per_pair.iter().filter_map(|r| r.0).collect();
    let inp: Vec<f64> = per_pair.iter().filter_map(|r| r.1).collect();
    let gain: Vec<f64> = per_pair.iter().filter_map(|r| r.2).collect();
    Ok(InpaintReport {
        n_pairs: pairs.len(),
        accuracy_pct: mean(&acc),
        inpainted_pct: mean(&inp),
        target_gain_pct: mean(&gain),
        histogram: accuracy_histogram(&acc),
    })
}
