//! Dense row-major tensors.

use crate::error::{Error, Result};
use crate::num::{r, Real};

/// A dense numeric array. All entries are expected to stay finite; the
/// training loop checks for divergence rather than every op paying for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<R: Real> {
    shape: Vec<usize>,
    data: Vec<R>,
}

impl<R: Real> Tensor<R> {
    pub fn new(shape: Vec<usize>, data: Vec<R>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "data length {} does not match shape {:?} (= {expected})",
                data.len(),
                shape
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self { shape, data: vec![R::zero(); len] }
    }

    /// A bit pattern as a single-channel tensor of 0.0/1.0, shape [1, len].
    pub fn from_bits(bits: &[u8]) -> Self {
        Self {
            shape: vec![1, bits.len()],
            data: bits.iter().map(|&b| r::<R>(f64::from(b & 1))).collect(),
        }
    }

    /// One-hot vector of length `len`, shape [len].
    pub fn one_hot(len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::LabelOutOfRange { label: index, count: len });
        }
        let mut data = vec![R::zero(); len];
        data[index] = R::one();
        Ok(Self { shape: vec![len], data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[R] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [R] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Interpret as (channels, length); errors unless rank 2.
    pub fn as_2d(&self) -> Result<(usize, usize)> {
        if self.shape.len() != 2 {
            return Err(Error::Shape(format!("expected rank-2 tensor, got {:?}", self.shape)));
        }
        Ok((self.shape[0], self.shape[1]))
    }

    pub fn to_f64(&self) -> (Vec<usize>, Vec<f64>) {
        (
            self.shape.clone(),
            self.data.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        )
    }

    pub fn from_f64(shape: Vec<usize>, data: &[f64]) -> Result<Self> {
        let converted = data.iter().map(|&v| r::<R>(v)).collect();
        Self::new(shape, converted)
    }
}
