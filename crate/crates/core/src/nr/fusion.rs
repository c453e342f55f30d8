//! Combining soft-decoder posteriors with channel LLRs.

use crate::error::{Error, Result};
use crate::ldpc::LlrVector;
use crate::nr::SoftPosterior;
use crate::num::{clamp_llr, Real};

/// Initial LLRs for belief propagation: for each of the k information
/// bits, the soft-decoder posterior is converted to an LLR and added to
/// the channel LLR; parity positions keep their channel LLR untouched.
///
/// `out_i = llr_i + ln((1 - q_i) / q_i)` for `i < k`, `out_i = llr_i`
/// otherwise, clamped to the global cap.
pub fn llr_fusion<R: Real>(
    channel_llrs: &LlrVector<R>,
    posterior: &SoftPosterior<R>,
) -> Result<LlrVector<R>> {
    let n = channel_llrs.len();
    let k = posterior.len();
    if k > n {
        return Err(Error::LengthMismatch { expected: n, got: k });
    }
    let mut out = Vec::with_capacity(n);
    for (i, &llr) in channel_llrs.values().iter().enumerate() {
        let fused = if i < k {
            let q = posterior.q()[i];
            clamp_llr(llr + ((R::one() - q) / q).ln())
        } else {
            llr
        };
        out.push(fused);
    }
    LlrVector::new(out)
}
