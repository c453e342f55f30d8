//! Minimal deterministic feed-forward network engine.
//!
//! Dense, 1-D convolution, 1-D transposed convolution, max pooling, ReLU
//! and sigmoid, with exact reverse-mode gradients, AdaDelta, and a plain
//! mini-batch training loop. Everything is seeded and summation orders are
//! fixed, so identical seeds give bit-identical trained parameters.

mod adadelta;
mod loss;
mod model_io;
mod ops;
mod shapes;
mod tensor;
mod train;

pub use adadelta::{adadelta_step, AdaDeltaConfig, AdaDeltaState};
pub use loss::{cross_entropy_loss, negative_doubling_rate_loss};
pub use model_io::{load_model, load_model_path, save_model, save_model_path, ModelFile};
pub use ops::sigmoid;
pub use shapes::{compute_feature_map_lengths, layer_output_shape};
pub use tensor::Tensor;
pub use train::{train, LossKind, Target, TrainConfig, TrainReport};

pub(crate) use train::batch_schedule as batch_schedule_for;

use rand::RngExt;

use crate::error::{Error, Result};
use crate::num::{r, Real};
use crate::util::{domain, keyed_rng, mix64};

/// One layer of a [`LayerGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Dense { out: usize },
    Conv1d { filters: usize, width: usize },
    MaxPool1d { window: usize, stride: usize },
    Deconv1d { filters: usize, width: usize, stride: usize },
    Relu,
    Sigmoid,
}

impl LayerSpec {
    fn tag(&self) -> u64 {
        match self {
            LayerSpec::Dense { out } => mix64(&[1, *out as u64]),
            LayerSpec::Conv1d { filters, width } => mix64(&[2, *filters as u64, *width as u64]),
            LayerSpec::MaxPool1d { window, stride } => mix64(&[3, *window as u64, *stride as u64]),
            LayerSpec::Deconv1d { filters, width, stride } => {
                mix64(&[4, *filters as u64, *width as u64, *stride as u64])
            }
            LayerSpec::Relu => mix64(&[5]),
            LayerSpec::Sigmoid => mix64(&[6]),
        }
    }
}

/// An ordered stack of layers with their parameter tensors.
#[derive(Debug, Clone)]
pub struct LayerGraph<R: Real> {
    input_shape: Vec<usize>,
    specs: Vec<LayerSpec>,
    /// Parameter tensors per layer: `[weights, bias]` or empty.
    params: Vec<Vec<Tensor<R>>>,
    init_seed: u64,
}

/// Activations recorded by a forward pass, consumed by `backward`.
#[derive(Debug, Clone)]
pub struct ForwardCache<R: Real> {
    token: u64,
    inputs: Vec<Tensor<R>>,
    output: Tensor<R>,
}

impl<R: Real> ForwardCache<R> {
    pub fn output(&self) -> &Tensor<R> {
        &self.output
    }
}

/// Parameter gradients (same nesting as the model parameters) plus the
/// gradient with respect to the input.
#[derive(Debug, Clone)]
pub struct Gradients<R: Real> {
    pub params: Vec<Vec<Tensor<R>>>,
    pub input: Tensor<R>,
}

impl<R: Real> LayerGraph<R> {
    /// Build a model, validating that adjacent layer shapes compose, and
    /// initialize parameters with seeded Glorot-uniform draws.
    pub fn new(input_shape: Vec<usize>, specs: Vec<LayerSpec>, init_seed: u64) -> Result<Self> {
        let mut params = Vec::with_capacity(specs.len());
        let mut shape = input_shape.clone();
        for (idx, spec) in specs.iter().enumerate() {
            let out_shape = shapes::layer_output_shape(spec, &shape)
                .map_err(|e| Error::Shape(format!("layer {idx}: {e}")))?;
            params.push(init_params(spec, &shape, init_seed, idx as u64)?);
            shape = out_shape;
        }
        Ok(Self { input_shape, specs, params, init_seed })
    }

    /// Reassemble a model from stored parts (deserialization), re-checking
    /// every shape.
    pub fn from_parts(
        input_shape: Vec<usize>,
        specs: Vec<LayerSpec>,
        params: Vec<Vec<Tensor<R>>>,
        init_seed: u64,
    ) -> Result<Self> {
        if params.len() != specs.len() {
            return Err(Error::Shape(format!(
                "{} parameter sets for {} layers",
                params.len(),
                specs.len()
            )));
        }
        let reference = Self::new(input_shape.clone(), specs.clone(), init_seed)?;
        for (idx, (got, want)) in params.iter().zip(&reference.params).enumerate() {
            if got.len() != want.len() {
                return Err(Error::Shape(format!("layer {idx}: wrong parameter count")));
            }
            for (g, w) in got.iter().zip(want) {
                if g.shape() != w.shape() {
                    return Err(Error::Shape(format!(
                        "layer {idx}: parameter shape {:?} does not match {:?}",
                        g.shape(),
                        w.shape()
                    )));
                }
            }
        }
        Ok(Self { input_shape, specs, params, init_seed })
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn params(&self) -> &[Vec<Tensor<R>>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Vec<Tensor<R>>] {
        &mut self.params
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    pub fn output_shape(&self) -> Result<Vec<usize>> {
        let mut shape = self.input_shape.clone();
        for spec in &self.specs {
            shape = shapes::layer_output_shape(spec, &shape)?;
        }
        Ok(shape)
    }

    /// Structural fingerprint used to detect stale caches.
    fn token(&self) -> u64 {
        let mut parts: Vec<u64> = self.input_shape.iter().map(|&d| d as u64).collect();
        for (spec, p) in self.specs.iter().zip(&self.params) {
            parts.push(spec.tag());
            for t in p {
                parts.extend(t.shape().iter().map(|&d| d as u64));
            }
        }
        mix64(&parts)
    }

    /// Run the model, returning the output and the cached activations
    /// needed for a backward pass.
    pub fn forward(&self, input: &Tensor<R>) -> Result<ForwardCache<R>> {
        if input.shape() != self.input_shape.as_slice() {
            return Err(Error::Shape(format!(
                "input shape {:?} does not match model input {:?}",
                input.shape(),
                self.input_shape
            )));
        }
        let mut inputs = Vec::with_capacity(self.specs.len());
        let mut current = input.clone();
        for (spec, p) in self.specs.iter().zip(&self.params) {
            inputs.push(current.clone());
            current = match *spec {
                LayerSpec::Dense { .. } => ops::dense_forward(&p[0], &p[1], &current)?,
                LayerSpec::Conv1d { .. } => ops::conv1d_forward(&p[0], &p[1], &current)?,
                LayerSpec::MaxPool1d { window, stride } => {
                    ops::maxpool1d_forward(window, stride, &current)?
                }
                LayerSpec::Deconv1d { stride, .. } => {
                    ops::deconv1d_forward(&p[0], &p[1], stride, &current)?
                }
                LayerSpec::Relu => ops::relu_forward(&current),
                LayerSpec::Sigmoid => ops::sigmoid_forward(&current),
            };
        }
        Ok(ForwardCache { token: self.token(), inputs, output: current })
    }

    /// Convenience forward pass that discards the cache.
    pub fn predict(&self, input: &Tensor<R>) -> Result<Tensor<R>> {
        Ok(self.forward(input)?.output)
    }

    /// Exact reverse-mode gradients for every parameter, given the loss
    /// gradient with respect to the model output.
    pub fn backward(&self, cache: &ForwardCache<R>, loss_grad: &Tensor<R>) -> Result<Gradients<R>> {
        if cache.token != self.token() {
            return Err(Error::StaleCache);
        }
        if loss_grad.shape() != cache.output.shape() {
            return Err(Error::Shape(format!(
                "loss gradient shape {:?} does not match output {:?}",
                loss_grad.shape(),
                cache.output.shape()
            )));
        }
        let mut grads: Vec<Vec<Tensor<R>>> = Vec::with_capacity(self.specs.len());
        let mut grad = loss_grad.clone();
        for idx in (0..self.specs.len()).rev() {
            let input = &cache.inputs[idx];
            let p = &self.params[idx];
            let (layer_grads, next) = match self.specs[idx] {
                LayerSpec::Dense { .. } => {
                    let g = if grad.shape().len() == 1 {
                        grad.clone()
                    } else {
                        Tensor::new(vec![grad.len()], grad.data().to_vec())?
                    };
                    let (dw, db, dx) = ops::dense_backward(&p[0], input, &g)?;
                    (vec![dw, db], dx)
                }
                LayerSpec::Conv1d { .. } => {
                    let (dw, db, dx) = ops::conv1d_backward(&p[0], input, &grad)?;
                    (vec![dw, db], dx)
                }
                LayerSpec::MaxPool1d { window, stride } => {
                    (Vec::new(), ops::maxpool1d_backward(window, stride, input, &grad)?)
                }
                LayerSpec::Deconv1d { stride, .. } => {
                    let (dw, db, dx) = ops::deconv1d_backward(&p[0], stride, input, &grad)?;
                    (vec![dw, db], dx)
                }
                LayerSpec::Relu => (Vec::new(), ops::relu_backward(input, &grad)),
                LayerSpec::Sigmoid => (Vec::new(), ops::sigmoid_backward(input, &grad)),
            };
            grads.push(layer_grads);
            grad = next;
        }
        grads.reverse();
        Ok(Gradients { params: grads, input: grad })
    }

    /// Zero-valued gradient accumulators matching the parameter layout.
    pub fn zero_gradients(&self) -> Vec<Vec<Tensor<R>>> {
        self.params
            .iter()
            .map(|layer| layer.iter().map(|t| Tensor::zeros(t.shape().to_vec())).collect())
            .collect()
    }
}

/// Glorot-style uniform initialization, seeded per layer.
fn init_params<R: Real>(
    spec: &LayerSpec,
    input_shape: &[usize],
    seed: u64,
    layer_idx: u64,
) -> Result<Vec<Tensor<R>>> {
    let mut rng = keyed_rng(seed, layer_idx, domain::INIT);
    let mut uniform = |shape: Vec<usize>, fan_in: usize, fan_out: usize| -> Tensor<R> {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let len: usize = shape.iter().product();
        let data = (0..len).map(|_| r::<R>(rng.random_range(-limit..limit))).collect();
        Tensor::new(shape, data).expect("shape/data agree")
    };
    Ok(match *spec {
        LayerSpec::Dense { out } => {
            let fan_in: usize = input_shape.iter().product();
            vec![uniform(vec![out, fan_in], fan_in, out), Tensor::zeros(vec![out])]
        }
        LayerSpec::Conv1d { filters, width } => {
            let c_in = input_shape[0];
            vec![
                uniform(vec![filters, c_in, width], c_in * width, filters * width),
                Tensor::zeros(vec![filters]),
            ]
        }
        LayerSpec::Deconv1d { filters, width, .. } => {
            let c_in = input_shape[0];
            vec![
                uniform(vec![c_in, filters, width], c_in * width, filters * width),
                Tensor::zeros(vec![filters]),
            ]
        }
        LayerSpec::MaxPool1d { .. } | LayerSpec::Relu | LayerSpec::Sigmoid => Vec::new(),
    })
}
