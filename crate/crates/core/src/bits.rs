//! Bit containers and byte/bit conversions.
//!
//! All byte-to-bit expansion in this crate is MSB-first: byte `0xA5`
//! becomes `1,0,1,0,0,1,0,1`. The choice is arbitrary but fixed, because it
//! changes every downstream bit pattern.

use crate::error::{Error, Result};

/// Where a segment came from, for bookkeeping and logs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentOrigin {
    pub file: String,
    pub offset_bits: u64,
}

/// A fixed-length bit vector holding an information block (`k` bits) or a
/// codeword (`n` bits), with optional provenance metadata.
///
/// Bits are stored one per byte with values 0/1; desk-scale lengths make
/// packing pointless and this keeps XOR and indexing trivial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSegment {
    bits: Vec<u8>,
    label: Option<usize>,
    origin: Option<SegmentOrigin>,
}

impl BitSegment {
    /// Wrap a bit vector. Every entry must be 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "bit value {b} is not 0 or 1"
            )));
        }
        Ok(Self { bits, label: None, origin: None })
    }

    /// Expand a whole byte slice MSB-first into one segment.
    pub fn from_bytes_msb(bytes: &[u8]) -> Self {
        Self { bits: bytes_to_bits_msb(bytes), label: None, origin: None }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len], label: None, origin: None }
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_origin(mut self, origin: SegmentOrigin) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn origin(&self) -> Option<&SegmentOrigin> {
        self.origin.as_ref()
    }

    /// XOR with an equally long mask (error-pattern application).
    pub fn xor(&self, mask: &[u8]) -> Result<Self> {
        if mask.len() != self.bits.len() {
            return Err(Error::LengthMismatch { expected: self.bits.len(), got: mask.len() });
        }
        let bits = self.bits.iter().zip(mask).map(|(a, b)| a ^ (b & 1)).collect();
        Ok(Self { bits, label: self.label, origin: self.origin.clone() })
    }

    pub fn hamming_distance(&self, other: &Self) -> usize {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Expand bytes into bits, MSB first.
pub fn bytes_to_bits_msb(bytes: &[u8]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(bytes.len() * 8);
    for &byte in bytes {
        for shift in (0..8).rev() {
            bits.push((byte >> shift) & 1);
        }
    }
    bits
}

/// Pack bits into bytes, MSB first. A partial trailing byte is zero-padded.
pub fn bits_to_bytes_msb(bits: &[u8]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(bits.len().div_ceil(8));
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            byte |= (b & 1) << (7 - i);
        }
        bytes.push(byte);
    }
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_expansion() {
        assert_eq!(bytes_to_bits_msb(&[0xA5]), vec![1, 0, 1, 0, 0, 1, 0, 1]);
        assert_eq!(bits_to_bytes_msb(&[1, 0, 1, 0, 0, 1, 0, 1]), vec![0xA5]);
    }

    #[test]
    fn roundtrip_with_padding() {
        let bits = vec![1, 1, 0, 1, 0];
        let bytes = bits_to_bytes_msb(&bits);
        assert_eq!(bytes, vec![0b1101_0000]);
        assert_eq!(&bytes_to_bits_msb(&bytes)[..5], &bits[..]);
    }

    #[test]
    fn rejects_non_bits() {
        assert!(BitSegment::from_bits(vec![0, 1, 2]).is_err());
    }

    #[test]
    fn xor_needs_matching_length() {
        let seg = BitSegment::from_bits(vec![1, 0, 1]).unwrap();
        assert!(seg.xor(&[1, 1]).is_err());
        let flipped = seg.xor(&[1, 1, 1]).unwrap();
        assert_eq!(flipped.bits(), &[0, 1, 0]);
    }
}
