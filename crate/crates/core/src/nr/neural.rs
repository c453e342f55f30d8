//! Conv-deconv neural soft decoders.
//!
//! The architecture narrows with valid convolutions and widens back with
//! transposed convolutions to the exact input length, ending in a sigmoid
//! per bit. Internal dimensions are configuration, not contract; the only
//! structural requirements are conv layers first, deconv layers after, and
//! output length equal to input length.

use std::path::Path;

use crate::bits::BitSegment;
use crate::error::{Error, Result};
use crate::nn::{load_model_path, save_model_path, LayerGraph, LayerSpec, Tensor};
use crate::nr::{SoftDecoder, SoftPosterior};
use crate::num::Real;

/// Build a symmetric conv-deconv stack for segments of `len` bits:
/// `depth` width-3 convolutions with `filters` feature maps (ReLU after
/// each), mirrored by deconvolutions back to one channel, sigmoid head.
pub fn build_conv_deconv_graph<R: Real>(
    len: usize,
    filters: usize,
    depth: usize,
    seed: u64,
) -> Result<LayerGraph<R>> {
    if depth == 0 || filters == 0 {
        return Err(Error::InvalidParameter("depth and filters must be positive".into()));
    }
    if len < 2 * depth + 1 {
        return Err(Error::Shape(format!(
            "segment length {len} too short for {depth} width-3 conv layers"
        )));
    }
    let mut specs = Vec::with_capacity(depth * 4 + 1);
    for _ in 0..depth {
        specs.push(LayerSpec::Conv1d { filters, width: 3 });
        specs.push(LayerSpec::Relu);
    }
    for d in 0..depth {
        let last = d + 1 == depth;
        specs.push(LayerSpec::Deconv1d {
            filters: if last { 1 } else { filters },
            width: 3,
            stride: 1,
        });
        if !last {
            specs.push(LayerSpec::Relu);
        }
    }
    specs.push(LayerSpec::Sigmoid);
    let graph = LayerGraph::new(vec![1, len], specs, seed)?;
    debug_assert_eq!(graph.output_shape()?, vec![1, len]);
    Ok(graph)
}

/// Run a conv-deconv model on a noisy segment: per-bit sigmoid outputs,
/// clipped into the open unit interval.
pub fn neural_soft_decode<R: Real>(
    noisy: &BitSegment,
    model: &LayerGraph<R>,
) -> Result<SoftPosterior<R>> {
    let out = model.predict(&Tensor::from_bits(noisy.bits()))?;
    if out.len() != noisy.len() {
        return Err(Error::Shape(format!(
            "model produced {} outputs for a {}-bit segment",
            out.len(),
            noisy.len()
        )));
    }
    SoftPosterior::new(out.data().to_vec())
}

/// A trained soft decoder for one file type at one training BER.
#[derive(Debug, Clone)]
pub struct NeuralSoftDecoder {
    pub graph: LayerGraph<f64>,
    pub file_type: String,
    pub segment_len: usize,
    pub trained_ber: f64,
}

impl NeuralSoftDecoder {
    pub fn new(
        graph: LayerGraph<f64>,
        file_type: &str,
        segment_len: usize,
        trained_ber: f64,
    ) -> Result<Self> {
        let out = graph.output_shape()?;
        if out != vec![1, segment_len] {
            return Err(Error::Shape(format!(
                "decoder outputs {out:?}, segment length is {segment_len}"
            )));
        }
        Ok(Self { graph, file_type: file_type.to_string(), segment_len, trained_ber })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let meta = vec![
            ("kind".to_string(), "softdec".to_string()),
            ("file_type".to_string(), self.file_type.clone()),
            ("segment_len".to_string(), self.segment_len.to_string()),
            ("trained_ber".to_string(), self.trained_ber.to_string()),
        ];
        save_model_path(path, &self.graph, &meta)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = load_model_path::<f64>(path)?;
        if file.meta_value("kind") != Some("softdec") {
            return Err(Error::ModelFormat(format!(
                "{} is not a soft-decoder model",
                path.display()
            )));
        }
        let file_type = file
            .meta_value("file_type")
            .ok_or_else(|| Error::ModelFormat("missing file_type metadata".into()))?
            .to_string();
        let segment_len: usize = file
            .meta_value("segment_len")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::ModelFormat("missing segment_len metadata".into()))?;
        let trained_ber: f64 = file
            .meta_value("trained_ber")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::ModelFormat("missing trained_ber metadata".into()))?;
        Self::new(file.graph, &file_type, segment_len, trained_ber)
    }
}

impl SoftDecoder for NeuralSoftDecoder {
    fn decode(&self, noisy: &BitSegment, _p: f64) -> Result<SoftPosterior<f64>> {
        if noisy.len() != self.segment_len {
            return Err(Error::LengthMismatch { expected: self.segment_len, got: noisy.len() });
        }
        neural_soft_decode(noisy, &self.graph)
    }

    fn segment_len(&self) -> usize {
        self.segment_len
    }

    fn file_type(&self) -> &str {
        &self.file_type
    }

    fn trained_ber(&self) -> Option<f64> {
        Some(self.trained_ber)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::sigmoid;

    #[test]
    fn zero_weights_give_a_constant_sigmoid_of_bias() {
        let mut graph = build_conv_deconv_graph::<f64>(32, 4, 2, 1).unwrap();
        for layer in graph.params_mut() {
            for t in layer {
                for v in t.data_mut() {
                    *v = 0.0;
                }
            }
        }
        // Set the final deconv bias to a recognizable value.
        let bias_value = 0.75;
        let last_param_layer = graph
            .params()
            .iter()
            .rposition(|p| !p.is_empty())
            .unwrap();
        graph.params_mut()[last_param_layer][1].data_mut()[0] = bias_value;

        let noisy = BitSegment::from_bits([1, 0].repeat(16)).unwrap();
        let q = neural_soft_decode(&noisy, &graph).unwrap();
        let expect = sigmoid(bias_value);
        assert!(q.q().iter().all(|&v| (v - expect).abs() < 1e-15));
    }

    #[test]
    fn output_length_tracks_input_length_for_any_segment_size() {
        for len in [16usize, 33, 512] {
            let graph = build_conv_deconv_graph::<f64>(len, 3, 2, 2).unwrap();
            assert_eq!(graph.output_shape().unwrap(), vec![1, len]);
        }
    }

    #[test]
    fn decoder_checks_segment_length() {
        let graph = build_conv_deconv_graph::<f64>(32, 2, 2, 3).unwrap();
        let dec = NeuralSoftDecoder::new(graph, "markov", 32, 0.012).unwrap();
        let wrong = BitSegment::from_bits(vec![0; 31]).unwrap();
        assert!(dec.decode(&wrong, 0.012).is_err());
        let right = BitSegment::from_bits(vec![0; 32]).unwrap();
        let q = dec.decode(&right, 0.012).unwrap();
        assert_eq!(q.len(), 32);
    }

    #[test]
    fn save_load_round_trip_keeps_metadata() {
        let graph = build_conv_deconv_graph::<f64>(24, 2, 1, 4).unwrap();
        let dec = NeuralSoftDecoder::new(graph, "html", 24, 0.008).unwrap();
        let dir = std::env::temp_dir().join(format!("softdec-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("d.nrnn");
        dec.save(&path).unwrap();
        let loaded = NeuralSoftDecoder::load(&path).unwrap();
        assert_eq!(loaded.file_type, "html");
        assert_eq!(loaded.segment_len, 24);
        assert_eq!(loaded.trained_ber, 0.008);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn too_short_segments_are_rejected_at_build_time() {
        assert!(build_conv_deconv_graph::<f64>(4, 2, 2, 1).is_err());
    }
}
