//! AdaDelta parameter updates.

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;
use crate::nn::LayerGraph;
use crate::num::{r, Real};

/// AdaDelta hyperparameters. The reference setting is rho 0.95 and
/// learning rate 1.0 with no decay; epsilon defaults to 1e-7.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaDeltaConfig {
    pub rho: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
    pub decay: f64,
}

impl Default for AdaDeltaConfig {
    fn default() -> Self {
        Self { rho: 0.95, epsilon: 1e-7, learning_rate: 1.0, decay: 0.0 }
    }
}

/// Running accumulators `E[g^2]` and `E[dx^2]`, one entry per parameter.
#[derive(Debug, Clone)]
pub struct AdaDeltaState<R: Real> {
    pub cfg: AdaDeltaConfig,
    eg2: Vec<Vec<Tensor<R>>>,
    edx2: Vec<Vec<Tensor<R>>>,
    step: u64,
}

impl<R: Real> AdaDeltaState<R> {
    pub fn new(model: &LayerGraph<R>, cfg: AdaDeltaConfig) -> Self {
        Self { cfg, eg2: model.zero_gradients(), edx2: model.zero_gradients(), step: 0 }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Accumulator access for tests (E[g^2], E[dx^2]).
    #[allow(clippy::type_complexity)]
    pub fn accumulators(&self) -> (&[Vec<Tensor<R>>], &[Vec<Tensor<R>>]) {
        (&self.eg2, &self.edx2)
    }
}

/// One AdaDelta step, elementwise over every parameter tensor:
///
/// `E[g^2] <- rho*E[g^2] + (1-rho)*g^2`
/// `dx = -sqrt(E[dx^2]+eps) / sqrt(E[g^2]+eps) * g`
/// `E[dx^2] <- rho*E[dx^2] + (1-rho)*dx^2`
/// `param += lr * dx`
///
/// with `lr = learning_rate / (1 + decay*step)`.
pub fn adadelta_step<R: Real>(
    state: &mut AdaDeltaState<R>,
    params: &mut [Vec<Tensor<R>>],
    grads: &[Vec<Tensor<R>>],
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.eg2.len() {
        return Err(Error::Shape("optimizer state does not match parameters".into()));
    }
    let rho = r::<R>(state.cfg.rho);
    let one_minus_rho = R::one() - rho;
    let eps = r::<R>(state.cfg.epsilon);
    let lr = r::<R>(state.cfg.learning_rate / (1.0 + state.cfg.decay * state.step as f64));

    for (layer, (pl, gl)) in params.iter_mut().zip(grads).enumerate() {
        if pl.len() != gl.len() {
            return Err(Error::Shape(format!("layer {layer}: gradient count mismatch")));
        }
        for (slot, (pt, gt)) in pl.iter_mut().zip(gl).enumerate() {
            if pt.shape() != gt.shape() {
                return Err(Error::Shape(format!(
                    "layer {layer} param {slot}: gradient shape {:?} vs {:?}",
                    gt.shape(),
                    pt.shape()
                )));
            }
            let eg2 = state.eg2[layer][slot].data_mut();
            let edx2 = state.edx2[layer][slot].data_mut();
            let p = pt.data_mut();
            for (i, &g) in gt.data().iter().enumerate() {
                eg2[i] = rho * eg2[i] + one_minus_rho * g * g;
                let dx = -((edx2[i] + eps).sqrt() / (eg2[i] + eps).sqrt()) * g;
                edx2[i] = rho * edx2[i] + one_minus_rho * dx * dx;
                p[i] += lr * dx;
            }
        }
    }
    state.step += 1;
    Ok(())
}
