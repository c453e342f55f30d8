//! Natural-redundancy soft decoding.
//!
//! A soft decoder looks at the k noisy information bits of a segment and
//! estimates, for every bit, the probability that its clean value is 1 —
//! using only the statistical structure of the data, never its parity
//! bits. Implementations here: a conv-deconv neural decoder trained per
//! file type ([`neural`]), and an exact forward-backward oracle for Markov
//! sources ([`markov`]) used to validate the pipeline independently of any
//! learned model. [`fusion`] turns posteriors into LLR corrections for the
//! ECC decoder, and [`ftr`] picks which decoder a segment is routed to.

pub mod ftr;
pub mod fusion;
pub mod markov;
pub mod neural;
pub mod training;

pub use ftr::{build_ftr_graph, ftr_classify, FileTypeModel};
pub use fusion::llr_fusion;
pub use markov::{
    markov_oracle_decode, markov_oracle_decode_mode, MarkovOracleDecoder, MarkovSource,
    PosteriorMode,
};
pub use neural::{build_conv_deconv_graph, neural_soft_decode, NeuralSoftDecoder};

use crate::bits::BitSegment;
use crate::error::{Error, Result};
use crate::num::{clip_prob, Real};

/// Per-bit posterior probabilities `q_i = Pr{x_i = 1 | Y, p}`, clipped
/// into the open unit interval so downstream logarithms stay finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftPosterior<R: Real> {
    q: Vec<R>,
}

impl<R: Real> SoftPosterior<R> {
    pub fn new(q: Vec<R>) -> Result<Self> {
        if let Some((i, _)) = q.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("posterior at position {i}")));
        }
        Ok(Self { q: q.into_iter().map(clip_prob).collect() })
    }

    /// The uninformative posterior: every bit equally likely 0 or 1.
    pub fn uniform(len: usize) -> Self {
        Self { q: vec![R::one() / (R::one() + R::one()); len] }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn q(&self) -> &[R] {
        &self.q
    }

    /// Hard decision: 1 where `q_i > 1/2`.
    pub fn hard_decision(&self) -> Vec<u8> {
        let half = R::one() / (R::one() + R::one());
        self.q.iter().map(|&v| u8::from(v > half)).collect()
    }
}

/// A soft decoder for one file type: maps a noisy k-bit segment to per-bit
/// posteriors. Implementations are immutable after load and safe to share
/// across threads; `decode` is pure.
pub trait SoftDecoder: Send + Sync {
    /// Estimate per-bit posteriors for a noisy segment observed through a
    /// BSC with crossover probability `p`. Learned decoders are trained at
    /// a fixed BER and may ignore `p` (the robust scheme); the exact
    /// oracle uses it.
    fn decode(&self, noisy: &BitSegment, p: f64) -> Result<SoftPosterior<f64>>;

    /// Segment length this decoder accepts.
    fn segment_len(&self) -> usize;

    /// File-type label this decoder is scoped to.
    fn file_type(&self) -> &str;

    /// The constant BER the decoder was trained for, if it was trained.
    fn trained_ber(&self) -> Option<f64>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::PROB_CLIP;

    #[test]
    fn posteriors_are_clipped_and_finite() {
        let p = SoftPosterior::new(vec![0.0_f64, 1.0, 0.25]).unwrap();
        assert_eq!(p.q(), &[PROB_CLIP, 1.0 - PROB_CLIP, 0.25]);
        assert!(SoftPosterior::new(vec![f64::NAN]).is_err());
        assert!(SoftPosterior::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn uniform_is_one_half() {
        let p = SoftPosterior::<f64>::uniform(3);
        assert_eq!(p.q(), &[0.5, 0.5, 0.5]);
        assert_eq!(p.hard_decision(), vec![0, 0, 0]);
    }
}
