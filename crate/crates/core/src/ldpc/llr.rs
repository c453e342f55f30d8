//! Log-likelihood ratio vectors.

use crate::error::{Error, Result};
use crate::num::{clamp_llr, Real};

/// A vector of natural-log LLRs, one per codeword bit.
///
/// Sign convention: positive means bit 0 is more likely. Entries are always
/// finite; construction clamps to the global cap and rejects NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector<R: Real> {
    values: Vec<R>,
}

impl<R: Real> LlrVector<R> {
    pub fn new(values: Vec<R>) -> Result<Self> {
        if let Some((i, _)) = values.iter().enumerate().find(|(_, v)| v.is_nan()) {
            return Err(Error::NonFinite(format!("LLR at position {i} is NaN")));
        }
        Ok(Self { values: values.into_iter().map(clamp_llr).collect() })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    /// Hard decision per the sign convention; an exact zero (no information)
    /// decides 1, so a decoder fed all-zero LLRs does not silently land on
    /// the all-zero codeword.
    pub fn hard_decision(&self) -> Vec<u8> {
        self.values.iter().map(|&v| if v > R::zero() { 0 } else { 1 }).collect()
    }
}
