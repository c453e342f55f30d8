//! Shape rules for the layer zoo, plus the conv/pool length recurrence.

use crate::error::{Error, Result};
use crate::nn::LayerSpec;

/// Output shape of a single layer given its input shape.
pub fn layer_output_shape(spec: &LayerSpec, input: &[usize]) -> Result<Vec<usize>> {
    match *spec {
        LayerSpec::Dense { out } => {
            if out == 0 {
                return Err(Error::Shape("dense layer with zero outputs".into()));
            }
            if input.iter().product::<usize>() == 0 {
                return Err(Error::Shape("dense layer on empty input".into()));
            }
            Ok(vec![out])
        }
        LayerSpec::Conv1d { filters, width } => {
            let (c, len) = two_d(input)?;
            if width == 0 || filters == 0 {
                return Err(Error::Shape("conv1d needs positive width and filters".into()));
            }
            if len < width {
                return Err(Error::Shape(format!(
                    "conv1d width {width} exceeds input length {len}"
                )));
            }
            let _ = c;
            Ok(vec![filters, len - width + 1])
        }
        LayerSpec::MaxPool1d { window, stride } => {
            let (c, len) = two_d(input)?;
            if window == 0 || stride == 0 {
                return Err(Error::Shape("maxpool1d needs positive window and stride".into()));
            }
            if len < window {
                return Err(Error::Shape(format!(
                    "maxpool1d window {window} exceeds input length {len}"
                )));
            }
            Ok(vec![c, (len - window) / stride + 1])
        }
        LayerSpec::Deconv1d { filters, width, stride } => {
            let (_, len) = two_d(input)?;
            if width == 0 || filters == 0 || stride == 0 {
                return Err(Error::Shape("deconv1d needs positive width, filters, stride".into()));
            }
            Ok(vec![filters, stride * (len - 1) + width])
        }
        LayerSpec::Relu | LayerSpec::Sigmoid => Ok(input.to_vec()),
    }
}

fn two_d(shape: &[usize]) -> Result<(usize, usize)> {
    if shape.len() != 2 || shape[0] == 0 || shape[1] == 0 {
        return Err(Error::Shape(format!(
            "expected a (channels, length) input, got {shape:?}"
        )));
    }
    Ok((shape[0], shape[1]))
}

/// Feature-map lengths of a stack of width-`l_d` convolutions, each
/// followed by a window-2 stride-2 max pool:
/// `K_1 = k - l_1 + 1`, `K_d = floor(K_{d-1} / 2) - l_d + 1`.
pub fn compute_feature_map_lengths(input_len: usize, widths: &[usize]) -> Result<Vec<usize>> {
    if widths.is_empty() {
        return Err(Error::InvalidParameter("no convolution widths given".into()));
    }
    if widths.iter().any(|&w| w < 1) {
        return Err(Error::InvalidParameter("filter widths must be at least 1".into()));
    }
    let mut lengths = Vec::with_capacity(widths.len());
    let mut prev = input_len as i64;
    for (d, &w) in widths.iter().enumerate() {
        let base = if d == 0 { prev } else { prev / 2 };
        let k = base - w as i64 + 1;
        if k < 1 {
            return Err(Error::Shape(format!(
                "architecture too deep for input length: K_{} = {k}",
                d + 1
            )));
        }
        lengths.push(k as usize);
        prev = k;
    }
    Ok(lengths)
}
