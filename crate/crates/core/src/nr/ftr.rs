//! File-type recognition: a 1-D CNN over the noisy information bits.

use std::path::Path;

use crate::bits::BitSegment;
use crate::error::{Error, Result};
use crate::nn::{
    compute_feature_map_lengths, load_model_path, save_model_path, LayerGraph, LayerSpec, Tensor,
};
use crate::num::Real;

/// Shortest feature-map length the conv stack is allowed to reach; depth
/// is chosen as the deepest stack that stays at or above it.
pub const MIN_FEATURE_LEN: usize = 4;

/// A trained file-type recognizer: conv/pool stack, dense head with one
/// sigmoid output per type in the registry.
#[derive(Debug, Clone)]
pub struct FileTypeModel<R: Real> {
    pub graph: LayerGraph<R>,
    pub registry: Vec<String>,
    pub input_len: usize,
    pub trained_ber: f64,
}

/// Build the recognizer architecture for segments of `input_len` bits and
/// `registry.len()` types: width-3 convolutions (first layer
/// `channels_first` feature maps, the rest `channels_rest`), each followed
/// by ReLU and a window-2 stride-2 max pool, as deep as the input allows,
/// then a dense layer with sigmoid outputs.
pub fn build_ftr_graph<R: Real>(
    input_len: usize,
    num_types: usize,
    channels_first: usize,
    channels_rest: usize,
    seed: u64,
) -> Result<LayerGraph<R>> {
    if num_types == 0 {
        return Err(Error::InvalidParameter("need at least one file type".into()));
    }
    let mut depth = 0usize;
    loop {
        let widths = vec![3usize; depth + 1];
        match compute_feature_map_lengths(input_len, &widths) {
            Ok(lengths) if *lengths.last().unwrap() >= MIN_FEATURE_LEN => depth += 1,
            _ => break,
        }
    }
    if depth == 0 {
        return Err(Error::Shape(format!(
            "input length {input_len} too short for any width-3 conv layer"
        )));
    }
    let mut specs = Vec::with_capacity(depth * 3 + 2);
    for d in 0..depth {
        let filters = if d == 0 { channels_first } else { channels_rest };
        specs.push(LayerSpec::Conv1d { filters, width: 3 });
        specs.push(LayerSpec::Relu);
        specs.push(LayerSpec::MaxPool1d { window: 2, stride: 2 });
    }
    specs.push(LayerSpec::Dense { out: num_types });
    specs.push(LayerSpec::Sigmoid);
    LayerGraph::new(vec![1, input_len], specs, seed)
}

/// Classify a noisy segment: sigmoid scores per type, argmax selection
/// with ties going to the lowest index.
pub fn ftr_classify<R: Real>(
    noisy: &BitSegment,
    model: &FileTypeModel<R>,
) -> Result<(usize, Vec<R>)> {
    if noisy.len() != model.input_len {
        return Err(Error::LengthMismatch { expected: model.input_len, got: noisy.len() });
    }
    let out = model.graph.predict(&Tensor::from_bits(noisy.bits()))?;
    let scores = out.data().to_vec();
    let mut best = 0usize;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok((best, scores))
}

impl<R: Real> FileTypeModel<R> {
    pub fn new(graph: LayerGraph<R>, registry: Vec<String>, input_len: usize, trained_ber: f64) -> Result<Self> {
        let out_shape = graph.output_shape()?;
        if out_shape != vec![registry.len()] {
            return Err(Error::Shape(format!(
                "model outputs {out_shape:?}, registry has {} types",
                registry.len()
            )));
        }
        Ok(Self { graph, registry, input_len, trained_ber })
    }

    pub fn num_types(&self) -> usize {
        self.registry.len()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let meta = vec![
            ("kind".to_string(), "ftr".to_string()),
            ("registry".to_string(), self.registry.join(",")),
            ("input_len".to_string(), self.input_len.to_string()),
            ("trained_ber".to_string(), self.trained_ber.to_string()),
        ];
        save_model_path(path, &self.graph, &meta)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = load_model_path::<R>(path)?;
        if file.meta_value("kind") != Some("ftr") {
            return Err(Error::ModelFormat(format!(
                "{} is not a file-type model",
                path.display()
            )));
        }
        let registry: Vec<String> = file
            .meta_value("registry")
            .ok_or_else(|| Error::ModelFormat("missing registry metadata".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let input_len: usize = file
            .meta_value("input_len")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::ModelFormat("missing input_len metadata".into()))?;
        let trained_ber: f64 = file
            .meta_value("trained_ber")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::ModelFormat("missing trained_ber metadata".into()))?;
        Self::new(file.graph, registry, input_len, trained_ber)
    }
}
