//! Mini-batch training loop.
//!
//! Deterministic by construction: the per-epoch shuffle is seeded, batches
//! are visited in order, and within a batch gradients are summed in sample
//! order. Identical seeds give bit-identical trained parameters.

use crate::error::{Error, Result};
use crate::nn::loss::{cross_entropy_loss, negative_doubling_rate_loss};
use crate::nn::tensor::Tensor;
use crate::nn::{adadelta_step, AdaDeltaConfig, AdaDeltaState, LayerGraph};
use crate::num::{r, Real};
use crate::util::{domain, keyed_rng, shuffle};

/// Supervision for one training sample.
#[derive(Debug, Clone)]
pub enum Target {
    /// Class index (cross entropy over the output scores).
    Label(usize),
    /// Per-output bit targets (negative doubling rate).
    Bits(Vec<u8>),
}

/// Which loss the trainer applies to the (sigmoid) model outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    CrossEntropy,
    NegDoublingRate,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub adadelta: AdaDeltaConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { batch_size: 100, epochs: 1, seed: 0, adadelta: AdaDeltaConfig::default() }
    }
}

/// Per-batch loss history: (global step, mean sample loss).
#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub history: Vec<(u64, f64)>,
}

impl TrainReport {
    pub fn final_loss(&self) -> Option<f64> {
        self.history.last().map(|&(_, l)| l)
    }

    /// Loss history as CSV text with a `step,loss` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,loss\n");
        for (step, loss) in &self.history {
            out.push_str(&format!("{step},{loss}\n"));
        }
        out
    }
}

/// Shuffled index batches for one epoch. Shared by the generic trainer and
/// the specialized one-hot trainer so their schedules match exactly.
pub(crate) fn batch_schedule(n: usize, batch_size: usize, epoch: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = keyed_rng(seed, epoch as u64, domain::SHUFFLE);
    shuffle(&mut idx, &mut rng);
    idx.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect()
}

/// Train a model in place. A batch size larger than the dataset means one
/// batch per epoch. Returns the per-batch loss history; a non-finite batch
/// loss aborts with a divergence error.
pub fn train<R: Real>(
    model: &mut LayerGraph<R>,
    data: &[(Tensor<R>, Target)],
    loss: LossKind,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidParameter("batch_size must be at least 1".into()));
    }
    let mut state = AdaDeltaState::new(model, cfg.adadelta);
    let mut report = TrainReport::default();
    let mut step: u64 = 0;

    for epoch in 0..cfg.epochs {
        for batch in batch_schedule(data.len(), cfg.batch_size, epoch, cfg.seed) {
            let scale = r::<R>(1.0 / batch.len() as f64);
            let mut grads = model.zero_gradients();
            let mut batch_loss = R::zero();
            for &i in &batch {
                let (input, target) = &data[i];
                let cache = model.forward(input)?;
                let out = cache.output().data();
                let (sample_loss, out_grad) = match (loss, target) {
                    (LossKind::CrossEntropy, Target::Label(l)) => cross_entropy_loss(out, *l)?,
                    (LossKind::NegDoublingRate, Target::Bits(b)) => {
                        negative_doubling_rate_loss(out, b)?
                    }
                    _ => {
                        return Err(Error::InvalidParameter(
                            "loss kind does not match target kind".into(),
                        ))
                    }
                };
                batch_loss += sample_loss;
                let grad_tensor =
                    Tensor::new(cache.output().shape().to_vec(), out_grad)?;
                let sample_grads = model.backward(&cache, &grad_tensor)?;
                accumulate(&mut grads, &sample_grads.params, scale);
            }
            let mean_loss = (batch_loss * scale).to_f64().unwrap_or(f64::NAN);
            if !mean_loss.is_finite() {
                return Err(Error::Divergence(format!(
                    "batch loss {mean_loss} at step {step}"
                )));
            }
            adadelta_step(&mut state, model.params_mut(), &grads)?;
            report.history.push((step, mean_loss));
            step += 1;
        }
        // Probability clipping keeps losses finite even when activations
        // are NaN, so divergence must also be caught at the parameters.
        for (layer, tensors) in model.params().iter().enumerate() {
            for t in tensors {
                if !t.is_finite() {
                    return Err(Error::Divergence(format!(
                        "non-finite parameter in layer {layer} after epoch {epoch}"
                    )));
                }
            }
        }
    }
    Ok(report)
}

fn accumulate<R: Real>(acc: &mut [Vec<Tensor<R>>], add: &[Vec<Tensor<R>>], scale: R) {
    for (al, gl) in acc.iter_mut().zip(add) {
        for (at, gt) in al.iter_mut().zip(gl) {
            for (a, &g) in at.data_mut().iter_mut().zip(gt.data()) {
                *a += g * scale;
            }
        }
    }
}
