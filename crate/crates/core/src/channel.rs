//! Binary symmetric channel simulation and channel LLRs.

use rand::RngExt;

use crate::bits::BitSegment;
use crate::error::{Error, Result};
use crate::ldpc::LlrVector;
use crate::num::{clamp_llr, r, Real, LLR_CLAMP};
use crate::util::{domain, keyed_rng};

/// A BSC instance: crossover probability plus the RNG key.
///
/// Identical `(seed, stream_id, p)` always produce the identical noise
/// mask, independent of execution order, so per-segment substreams can run
/// in parallel and still replay exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub p: f64,
    pub seed: u64,
    pub stream_id: u64,
}

impl ChannelSpec {
    pub fn new(p: f64, seed: u64, stream_id: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "crossover probability {p} outside [0, 1]"
            )));
        }
        Ok(Self { p, seed, stream_id })
    }
}

/// The error pattern the channel would apply: one uniform draw per bit,
/// flip where it falls below p. Deriving the mask independently of the
/// input word allows exact error-pattern logging, and reusing a stream
/// across different p values yields common-random-number comparisons
/// (the flip set at p is a subset of the flip set at p' > p).
pub fn noise_mask(len: usize, spec: &ChannelSpec) -> Vec<u8> {
    let mut rng = keyed_rng(spec.seed, spec.stream_id, domain::NOISE);
    (0..len).map(|_| u8::from(rng.random::<f64>() < spec.p)).collect()
}

/// Transmit a word through the BSC: mask-then-XOR.
pub fn bsc_transmit(word: &BitSegment, spec: &ChannelSpec) -> BitSegment {
    let mask = noise_mask(word.len(), spec);
    word.xor(&mask).expect("mask has matching length")
}

/// Channel LLR of one received bit: `ln((1-p)/p)` for a 0, `ln(p/(1-p))`
/// for a 1. Degenerate channels (p of exactly 0 or 1) saturate to the
/// global cap; the flag reports that saturation was applied.
pub fn channel_llr<R: Real>(bit: u8, p: f64) -> (R, bool) {
    let saturated = !(p > 0.0 && p < 1.0);
    // ln((1-p)/p) diverges to +inf as p -> 0 and -inf as p -> 1.
    let magnitude = if p <= 0.0 {
        LLR_CLAMP
    } else if p >= 1.0 {
        -LLR_CLAMP
    } else {
        ((1.0 - p) / p).ln()
    };
    let signed = if bit & 1 == 0 { magnitude } else { -magnitude };
    (clamp_llr(r::<R>(signed)), saturated)
}

/// Channel LLRs for a whole received word.
pub fn channel_llrs<R: Real>(word: &[u8], p: f64) -> (LlrVector<R>, bool) {
    let mut saturated = false;
    let values = word
        .iter()
        .map(|&b| {
            let (v, s) = channel_llr::<R>(b, p);
            saturated |= s;
            v
        })
        .collect();
    (LlrVector::new(values).expect("channel LLRs are finite"), saturated)
}

/// Parse a bit-error rate given either as a decimal (`0.008`) or as a
/// percentage (`0.8%`). Both forms must parse identically.
pub fn parse_ber(s: &str) -> Result<f64> {
    let t = s.trim();
    let (num, scale) = match t.strip_suffix('%') {
        Some(body) => (body.trim(), 0.01),
        None => (t, 1.0),
    };
    let v: f64 = num
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse BER {s:?}")))?;
    let p = v * scale;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("BER {s:?} outside [0, 1]")));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(len: usize, fill: u8) -> BitSegment {
        BitSegment::from_bits(vec![fill; len]).unwrap()
    }

    #[test]
    fn p_zero_is_the_identity() {
        let w = word(64, 1);
        let spec = ChannelSpec::new(0.0, 1, 2).unwrap();
        assert_eq!(bsc_transmit(&w, &spec).bits(), w.bits());
    }

    #[test]
    fn p_one_is_the_complement() {
        let w = BitSegment::from_bits(vec![0, 1, 0, 0, 1, 1]).unwrap();
        let spec = ChannelSpec::new(1.0, 1, 2).unwrap();
        assert_eq!(bsc_transmit(&w, &spec).bits(), &[1, 0, 1, 1, 0, 0]);
    }

    #[test]
    fn empirical_flip_rate_concentrates() {
        // Binomial concentration: one million bits at p = 0.01.
        let n = 1_000_000usize;
        let p = 0.01;
        let spec = ChannelSpec::new(p, 42, 7).unwrap();
        let flips: usize = noise_mask(n, &spec).iter().map(|&b| b as usize).sum();
        let freq = flips as f64 / n as f64;
        let tol = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() <= tol, "freq {freq} vs p {p} (tol {tol})");
    }

    #[test]
    fn llr_closed_forms() {
        let (v, s) = channel_llr::<f64>(0, 0.5);
        assert_eq!(v, 0.0);
        assert!(!s);
        let (v, _) = channel_llr::<f64>(0, 0.2);
        assert!((v - 4.0f64.ln()).abs() < 1e-12);
        let (v, _) = channel_llr::<f64>(1, 0.2);
        assert!((v + 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn llr_antisymmetry_and_monotonicity() {
        let mut prev = f64::INFINITY;
        for i in 1..50 {
            let p = i as f64 / 100.0;
            let (l0, _) = channel_llr::<f64>(0, p);
            let (l1, _) = channel_llr::<f64>(1, p);
            assert!((l0 + l1).abs() < 1e-12, "antisymmetry at p={p}");
            assert!(l0 < prev, "llr(0, p) must strictly decrease on (0, 0.5)");
            prev = l0;
        }
    }

    #[test]
    fn degenerate_p_saturates_with_flag() {
        let (v, s) = channel_llr::<f64>(0, 0.0);
        assert_eq!(v, LLR_CLAMP);
        assert!(s);
        let (v, s) = channel_llr::<f64>(1, 1.0);
        assert_eq!(v, LLR_CLAMP);
        assert!(s);
        let (_, s) = channel_llr::<f64>(0, 0.3);
        assert!(!s);
    }

    #[test]
    fn double_transmission_composes() {
        // Two independent passes at p and p' behave like one pass at
        // p + p' - 2pp', checked statistically.
        let n = 200_000usize;
        let (p1, p2) = (0.1, 0.2);
        let eff = p1 + p2 - 2.0 * p1 * p2;
        let w = word(n, 0);
        let once = bsc_transmit(&w, &ChannelSpec::new(p1, 5, 100).unwrap());
        let twice = bsc_transmit(&once, &ChannelSpec::new(p2, 5, 101).unwrap());
        let freq = twice.bits().iter().map(|&b| b as usize).sum::<usize>() as f64 / n as f64;
        let tol = 3.0 * (eff * (1.0 - eff) / n as f64).sqrt();
        assert!((freq - eff).abs() <= tol, "freq {freq} vs eff {eff} (tol {tol})");
    }

    #[test]
    fn masks_replay_exactly() {
        let spec = ChannelSpec::new(0.25, 9, 3).unwrap();
        assert_eq!(noise_mask(512, &spec), noise_mask(512, &spec));
        let other = ChannelSpec::new(0.25, 9, 4).unwrap();
        assert_ne!(noise_mask(512, &spec), noise_mask(512, &other));
    }

    #[test]
    fn ber_parsing_accepts_decimals_and_percents() {
        assert_eq!(parse_ber("0.008").unwrap(), 0.008);
        assert_eq!(parse_ber("0.8%").unwrap(), 0.008);
        assert_eq!(parse_ber(" 1.2% ").unwrap(), 0.012);
        assert!(parse_ber("150%").is_err());
        assert!(parse_ber("x").is_err());
    }

    #[test]
    fn out_of_range_p_is_rejected() {
        assert!(ChannelSpec::new(-0.1, 0, 0).is_err());
        assert!(ChannelSpec::new(1.1, 0, 0).is_err());
    }
}
