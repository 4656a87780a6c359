//! Map-prediction networks: the encoder-decoder generator, the patch
//! discriminator, both training regimes, inpainting metrics and weights IO.

mod discriminator;
mod generator;
mod metrics;
mod train;
mod weights;

pub use discriminator::{DiscCache, Discriminator, BLOCKS};
pub use generator::{GenCache, Generator, GeneratorArch, DEPTH};
pub use metrics::{
    accuracy_histogram, evaluate_inpainting, inpaint_accuracy, inpainted_fraction, overwrite_known, predict_inpaint, IdentityPredictor,
    InpaintReport, Predictor, HISTOGRAM_BINS,
};
pub use train::{
    init_generator, mean_l1, split_validation, to_tensors, train, train_gan, train_pred, EpochRecord, History,
    IterationRecord, Method, PredLoss, StopReason, TrainConfig, TrainOutput,
};
pub use weights::{
    decode_weights, encode_weights, load_weights, load_weights_for, save_weights, ModelWeights, OCCW_MAGIC,
    OCCW_VERSION,
};

use crate::nn::Tensor;
use crate::occupancy::ProbGrid;
use crate::Result;

impl Generator<f32> {
    /// Raw predictions for a list of grids sharing one spec.
    pub fn predict_grids(&self, grids: &[ProbGrid]) -> Result<Vec<ProbGrid>> {
        let Some(first) = grids.first() else {
            return Ok(Vec::new());
        };
        let spec = first.spec;
        let res = spec.resolution;
        let mut out = Vec::with_capacity(grids.len());
        for chunk in grids.chunks(32) {
            let mut data = Vec::with_capacity(chunk.len() * res * res);
            for g in chunk {
                if g.spec != spec {
                    return Err(crate::Error::ShapeMismatch("grids with different specs".into()));
                }
                data.extend_from_slice(&g.values);
            }
            let y = self.predict(&Tensor::from_vec(&[chunk.len(), 1, res, res], data)?)?;
            for i in 0..chunk.len() {
                out.push(ProbGrid::from_values(spec, y.sample(i).to_vec())?);
            }
        }
        Ok(out)
    }
}

impl Predictor for Generator<f32> {
    fn predict(&self, input: &ProbGrid) -> Result<ProbGrid> {
        let res = input.spec.resolution;
        let y = Generator::predict(self, &Tensor::from_vec(&[1, 1, res, res], input.values.clone())?)?;
        ProbGrid::from_values(input.spec, y.into_data())
    }
}

impl Predictor for ModelWeights {
    fn predict(&self, input: &ProbGrid) -> Result<ProbGrid> {
        Predictor::predict(&self.generator, input)
    }
}
