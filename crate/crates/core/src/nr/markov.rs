//! Binary Markov sources and their exact posterior decoder.
//!
//! The forward-backward pass below computes the quantity a trained soft
//! decoder can only approximate — `Pr{x_i = 1 | Y, p}` — exactly, for
//! sources whose redundancy is an order-m Markov structure. It serves as
//! the verification oracle for the whole fusion pipeline.

use rand::{Rng, RngExt};

use crate::bits::BitSegment;
use crate::error::{Error, Result};
use crate::nr::{SoftDecoder, SoftPosterior};
use crate::num::{r, Real};
use crate::util::{domain, keyed_rng};

/// Largest supported state count (order 16).
const MAX_STATES: usize = 1 << 16;

/// An order-m binary Markov source. State = the previous m bits; the
/// transition table gives `Pr{x_i = 1 | state}` per state; the initial
/// distribution covers the phantom context before the first bit, so every
/// emitted bit is conditioned the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSource {
    order: usize,
    transitions: Vec<f64>,
    initial: Vec<f64>,
}

impl MarkovSource {
    pub fn new(order: usize, transitions: Vec<f64>, initial: Vec<f64>) -> Result<Self> {
        let states = 1usize
            .checked_shl(order as u32)
            .filter(|&s| s <= MAX_STATES)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("order {order} exceeds the 2^16 state cap"))
            })?;
        if transitions.len() != states {
            return Err(Error::LengthMismatch { expected: states, got: transitions.len() });
        }
        if initial.len() != states {
            return Err(Error::LengthMismatch { expected: states, got: initial.len() });
        }
        if transitions.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidParameter("transition probability outside [0, 1]".into()));
        }
        if initial.iter().any(|p| *p < 0.0) {
            return Err(Error::InvalidParameter("negative initial probability".into()));
        }
        let total: f64 = initial.iter().sum();
        if !(total - 1.0).abs().lt(&1e-9) {
            return Err(Error::InvalidParameter(format!(
                "initial distribution sums to {total}, not 1"
            )));
        }
        // Normalize exactly so downstream sums start clean.
        let initial = initial.iter().map(|p| p / total).collect();
        Ok(Self { order, transitions, initial })
    }

    /// Uniform distribution over the initial context.
    pub fn with_uniform_initial(order: usize, transitions: Vec<f64>) -> Result<Self> {
        let states = transitions.len();
        Self::new(order, transitions, vec![1.0 / states as f64; states])
    }

    /// Memoryless source emitting 1 with probability `p_one`.
    pub fn bernoulli(p_one: f64) -> Result<Self> {
        Self::new(0, vec![p_one], vec![1.0])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    #[inline]
    fn mask(&self) -> usize {
        self.num_states() - 1
    }

    #[inline]
    fn shift(&self, state: usize, bit: u8) -> usize {
        ((state << 1) | bit as usize) & self.mask()
    }

    /// Sample a segment of `len` bits.
    pub fn sample(&self, len: usize, rng: &mut impl Rng) -> Vec<u8> {
        let mut state = sample_index(&self.initial, rng.random::<f64>());
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let bit = u8::from(rng.random::<f64>() < self.transitions[state]);
            out.push(bit);
            state = self.shift(state, bit);
        }
        out
    }

    /// Sample with a keyed stream, for reproducible per-segment draws.
    pub fn sample_seeded(&self, len: usize, seed: u64, stream: u64) -> Vec<u8> {
        let mut rng = keyed_rng(seed, stream, domain::SEGMENT);
        self.sample(len, &mut rng)
    }
}

fn sample_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Which posterior the oracle reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosteriorMode {
    /// `Pr{x_i = 1 | Y, p}`: the full posterior, conditioning on every
    /// observation including `y_i` itself. This is the quantity the
    /// learned decoders estimate, and what the fusion rule expects.
    Posterior,
    /// Same, but with the emission factor of `y_i` removed for bit i: the
    /// posterior given all *other* observations. Useful for experiments
    /// that avoid adding the channel observation twice during fusion.
    Extrinsic,
}

/// Exact per-bit posteriors of a Markov-source segment observed through a
/// BSC of crossover probability `p`, via the forward-backward algorithm
/// over the 2^m-state chain.
pub fn markov_oracle_decode<R: Real>(
    noisy: &[u8],
    source: &MarkovSource,
    p: f64,
) -> Result<SoftPosterior<R>> {
    markov_oracle_decode_mode(noisy, source, p, PosteriorMode::Posterior)
}

pub fn markov_oracle_decode_mode<R: Real>(
    noisy: &[u8],
    source: &MarkovSource,
    p: f64,
    mode: PosteriorMode,
) -> Result<SoftPosterior<R>> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "oracle requires p in (0, 0.5], got {p}"
        )));
    }
    let k = noisy.len();
    let states = source.num_states();
    let trans: Vec<R> = source.transitions.iter().map(|&t| r::<R>(t)).collect();
    let init: Vec<R> = source.initial.iter().map(|&t| r::<R>(t)).collect();
    let keep = r::<R>(1.0 - p);
    let flip = r::<R>(p);
    let emit = |y: u8, x: u8| if y == x { keep } else { flip };

    // Backward pass, one normalized table per position.
    let mut betas: Vec<Vec<R>> = vec![vec![R::one(); states]; k + 1];
    for i in (0..k).rev() {
        let y = noisy[i] & 1;
        let mut total = R::zero();
        for s in 0..states {
            let t1 = trans[s];
            let t0 = R::one() - t1;
            let v = t1 * emit(y, 1) * betas[i + 1][source.shift(s, 1)]
                + t0 * emit(y, 0) * betas[i + 1][source.shift(s, 0)];
            betas[i][s] = v;
            total += v;
        }
        if total <= R::zero() {
            return Err(Error::NonFinite(format!("backward mass vanished at bit {i}")));
        }
        for v in &mut betas[i] {
            *v /= total;
        }
    }

    // Forward pass with posteriors computed on the fly from the edge
    // marginals: alpha_i (state before bit i), the transition, the
    // emission, beta_{i+1} (state after bit i).
    let mut alpha = init;
    let mut q = Vec::with_capacity(k);
    for i in 0..k {
        let y = noisy[i] & 1;
        let mut num1 = R::zero();
        let mut num0 = R::zero();
        let mut next = vec![R::zero(); states];
        for s in 0..states {
            let a = alpha[s];
            if a == R::zero() {
                continue;
            }
            let t1 = trans[s];
            let t0 = R::one() - t1;
            let (s1, s0) = (source.shift(s, 1), source.shift(s, 0));
            let w1 = a * t1 * emit(y, 1);
            let w0 = a * t0 * emit(y, 0);
            next[s1] += w1;
            next[s0] += w0;
            match mode {
                PosteriorMode::Posterior => {
                    num1 += w1 * betas[i + 1][s1];
                    num0 += w0 * betas[i + 1][s0];
                }
                PosteriorMode::Extrinsic => {
                    num1 += a * t1 * betas[i + 1][s1];
                    num0 += a * t0 * betas[i + 1][s0];
                }
            }
        }
        let den = num1 + num0;
        if den <= R::zero() {
            return Err(Error::NonFinite(format!("posterior mass vanished at bit {i}")));
        }
        q.push(num1 / den);
        let total: R = next.iter().copied().sum();
        if total <= R::zero() {
            return Err(Error::NonFinite(format!("forward mass vanished at bit {i}")));
        }
        for v in &mut next {
            *v /= total;
        }
        alpha = next;
    }
    SoftPosterior::new(q)
}

/// [`SoftDecoder`] wrapper around the exact oracle, scoped to a segment
/// length and label the pipeline can route on.
#[derive(Debug, Clone)]
pub struct MarkovOracleDecoder {
    source: MarkovSource,
    mode: PosteriorMode,
    label: String,
    segment_len: usize,
}

impl MarkovOracleDecoder {
    pub fn new(source: MarkovSource, segment_len: usize, label: &str) -> Self {
        Self { source, mode: PosteriorMode::Posterior, label: label.to_string(), segment_len }
    }

    pub fn with_mode(mut self, mode: PosteriorMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn source(&self) -> &MarkovSource {
        &self.source
    }
}

impl SoftDecoder for MarkovOracleDecoder {
    fn decode(&self, noisy: &BitSegment, p: f64) -> Result<SoftPosterior<f64>> {
        if noisy.len() != self.segment_len {
            return Err(Error::LengthMismatch { expected: self.segment_len, got: noisy.len() });
        }
        markov_oracle_decode_mode(noisy.bits(), &self.source, p, self.mode)
    }

    fn segment_len(&self) -> usize {
        self.segment_len
    }

    fn file_type(&self) -> &str {
        &self.label
    }

    fn trained_ber(&self) -> Option<f64> {
        None
    }
}
