//! Learning unknown channel transition probabilities by maximizing the
//! doubling rate of proportional betting.
//!
//! A channel maps one of K input symbols to a single output bit. Given
//! only a stream of (symbol, bit) pairs, a small network — one-hot input,
//! K-unit hidden layer, single sigmoid output — is trained with the
//! negative-doubling-rate loss; at the optimum its outputs equal the true
//! transition probabilities, without ever counting symbol/bit frequencies.
//! Estimates are scored against the truth by average KL divergence.

use rand::RngExt;

use crate::error::{Error, Result};
use crate::nn::{
    adadelta_step, sigmoid, AdaDeltaConfig, AdaDeltaState, LayerGraph, LayerSpec, Tensor,
};
use crate::num::{clip_prob, PROB_CLIP};
use crate::util::{domain, keyed_rng};

/// A synthetic K-symbol channel with known transition probabilities
/// `p_i = Pr{bit = 1 | symbol = i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticChannel {
    pub probs: Vec<f64>,
    pub seed: u64,
}

impl SyntheticChannel {
    pub fn num_symbols(&self) -> usize {
        self.probs.len()
    }
}

/// A dataset of (symbol index, output bit) pairs.
#[derive(Debug, Clone, Default)]
pub struct PairDataset {
    pub samples: Vec<(u32, u8)>,
    pub num_symbols: usize,
}

impl PairDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Draw a K-symbol channel with each transition probability independently
/// uniform in (0, 1).
pub fn sample_channel(k: usize, seed: u64) -> Result<SyntheticChannel> {
    if k == 0 {
        return Err(Error::InvalidParameter("channel needs at least one symbol".into()));
    }
    let mut rng = keyed_rng(seed, 0, domain::CHANNEL_PROBS);
    let probs = (0..k)
        .map(|_| loop {
            let u: f64 = rng.random();
            if u > 0.0 && u < 1.0 {
                break u;
            }
        })
        .collect();
    Ok(SyntheticChannel { probs, seed })
}

/// Generate `n` channel uses: symbols uniform over [0, K), bit 1 with the
/// symbol's transition probability.
pub fn generate_pairs(channel: &SyntheticChannel, n: usize, seed: u64) -> Result<PairDataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one pair".into()));
    }
    let k = channel.num_symbols();
    let mut rng = keyed_rng(seed, 0, domain::PAIRS);
    let samples = (0..n)
        .map(|_| {
            let sym = rng.random_range(0..k) as u32;
            let bit = u8::from(rng.random::<f64>() < channel.probs[sym as usize]);
            (sym, bit)
        })
        .collect();
    Ok(PairDataset { samples, num_symbols: k })
}

/// Estimator training knobs. The batch is K x `batch_scale` pairs; the
/// dataset is swept `passes` times.
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub passes: usize,
    pub batch_scale: usize,
    pub seed: u64,
    pub adadelta: AdaDeltaConfig,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { passes: 3, batch_scale: 50, seed: 0, adadelta: AdaDeltaConfig::default() }
    }
}

/// The estimator network: K-wide one-hot input, K-unit hidden layer with
/// ReLU, single sigmoid output.
///
/// The hidden biases start at the Glorot weight limit rather than zero: a
/// one-hot input activates exactly one weight per hidden unit, so with
/// zero biases half the units sit behind a closed ReLU gate for any given
/// symbol and, at small K, whole symbols can lose their gradient path
/// permanently. Positive biases keep every unit initially active for
/// every symbol.
pub fn estimator_graph(k: usize, seed: u64) -> Result<LayerGraph<f64>> {
    let mut graph = LayerGraph::new(
        vec![k],
        vec![
            LayerSpec::Dense { out: k },
            LayerSpec::Relu,
            LayerSpec::Dense { out: 1 },
            LayerSpec::Sigmoid,
        ],
        seed,
    )?;
    let limit = (6.0 / (2 * k) as f64).sqrt();
    for b in graph.params_mut()[0][1].data_mut() {
        *b = limit;
    }
    Ok(graph)
}

/// Train the estimator with default configuration and read out
/// `q_1..q_K`.
pub fn train_estimator(data: &PairDataset, k: usize) -> Result<Vec<f64>> {
    train_estimator_with(data, k, &EstimatorConfig::default())
}

/// Train the estimator network on (symbol, bit) pairs by minimizing the
/// negative doubling rate, then evaluate it on each one-hot input.
///
/// The inner loop exploits that inputs are one-hot: the first dense layer
/// touches only the column of the active symbol, which is algebraically
/// identical to the dense forward/backward pass (zeros contribute nothing)
/// but linear instead of quadratic in K per sample. A test pins exact
/// agreement with the generic engine.
pub fn train_estimator_with(data: &PairDataset, k: usize, cfg: &EstimatorConfig) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if k == 0 || data.num_symbols != k {
        return Err(Error::InvalidParameter(format!(
            "dataset covers {} symbols, expected {k}",
            data.num_symbols
        )));
    }
    let mut seen = vec![false; k];
    for &(sym, _) in &data.samples {
        if sym as usize >= k {
            return Err(Error::IndexOutOfRange(format!("symbol {sym} with K = {k}")));
        }
        seen[sym as usize] = true;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidParameter(format!(
            "symbol {missing} never appears in the dataset"
        )));
    }

    let mut graph = estimator_graph(k, cfg.seed)?;
    train_estimator_sparse(&mut graph, data, cfg)?;
    read_out(&graph, k)
}

/// The specialized training loop. Public within the crate so tests can
/// drive it against the generic engine on identical schedules.
pub(crate) fn train_estimator_sparse(
    graph: &mut LayerGraph<f64>,
    data: &PairDataset,
    cfg: &EstimatorConfig,
) -> Result<()> {
    let k = data.num_symbols;
    let batch_size = (k * cfg.batch_scale).max(1);
    let ln2 = std::f64::consts::LN_2;
    let mut state = AdaDeltaState::new(graph, cfg.adadelta);

    for epoch in 0..cfg.passes {
        for batch in crate::nn::batch_schedule_for(data.len(), batch_size, epoch, cfg.seed) {
            let scale = 1.0 / batch.len() as f64;
            let mut grads = graph.zero_gradients();
            let mut diverged = false;
            {
                let params = graph.params();
                let (w1, b1) = (&params[0][0], &params[0][1]);
                let (w2, b2) = (&params[2][0], &params[2][1]);
                let (gw1, rest) = grads.split_at_mut(2);
                let (dw1, db1) = {
                    let layer = &mut gw1[0];
                    let (a, b) = layer.split_at_mut(1);
                    (a[0].data_mut(), b[0].data_mut())
                };
                let (dw2, db2) = {
                    let layer = &mut rest[0];
                    let (a, b) = layer.split_at_mut(1);
                    (a[0].data_mut(), b[0].data_mut())
                };

                let mut h_pre = vec![0.0f64; k];
                let mut h = vec![0.0f64; k];
                for &i in &batch {
                    let (sym, bit) = data.samples[i];
                    let col = sym as usize;
                    // Forward: hidden = relu(W1[:, col] + b1), out = sigmoid(W2 h + b2).
                    let mut z = b2.data()[0];
                    for j in 0..k {
                        let pre = w1.data()[j * k + col] + b1.data()[j];
                        h_pre[j] = pre;
                        let a = if pre > 0.0 { pre } else { 0.0 };
                        h[j] = a;
                        z += w2.data()[j] * a;
                    }
                    let q = sigmoid(z);
                    // Loss gradient at the clipped probability, sigmoid
                    // derivative at the raw one, matching the generic path.
                    let qc = clip_prob(q);
                    let dq = if bit == 1 { -1.0 / (ln2 * qc) } else { 1.0 / (ln2 * (1.0 - qc)) };
                    let dz = dq * q * (1.0 - q) * scale;
                    if !dz.is_finite() {
                        diverged = true;
                        break;
                    }
                    db2[0] += dz;
                    for j in 0..k {
                        dw2[j] += dz * h[j];
                        if h_pre[j] > 0.0 {
                            let dh = dz * w2.data()[j];
                            dw1[j * k + col] += dh;
                            db1[j] += dh;
                        }
                    }
                }
                if diverged {
                    return Err(Error::Divergence("non-finite gradient in estimator".into()));
                }
            }
            adadelta_step(&mut state, graph.params_mut(), &grads)?;
        }
    }
    Ok(())
}

fn read_out(graph: &LayerGraph<f64>, k: usize) -> Result<Vec<f64>> {
    (0..k)
        .map(|i| {
            let out = graph.predict(&Tensor::one_hot(k, i)?)?;
            Ok(clip_prob(out.data()[0]))
        })
        .collect()
}

/// Binary KL divergence in bits: `D(p || q)`.
pub fn kl_divergence_bits(p: f64, q: f64) -> f64 {
    let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
    let q = q.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
    p * (p / q).log2() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).log2()
}

/// Average KL divergence between the true transition probabilities and an
/// estimate: `(1/K) * sum_i D(p_i || q_i)`.
pub fn kl_report(truth: &SyntheticChannel, estimate: &[f64]) -> Result<f64> {
    if truth.num_symbols() != estimate.len() {
        return Err(Error::LengthMismatch { expected: truth.num_symbols(), got: estimate.len() });
    }
    let k = truth.num_symbols() as f64;
    Ok(truth
        .probs
        .iter()
        .zip(estimate)
        .map(|(&p, &q)| kl_divergence_bits(p, q))
        .sum::<f64>()
        / k)
}

/// Doubling rate of betting `q[symbol]` on each observed pair, in bits.
pub fn doubling_rate(data: &PairDataset, q: &[f64]) -> f64 {
    let total: f64 = data
        .samples
        .iter()
        .map(|&(sym, bit)| {
            let qi = q[sym as usize].clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            if bit == 1 { qi.log2() } else { (1.0 - qi).log2() }
        })
        .sum();
    total / data.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{train, LossKind, Target, TrainConfig};

    #[test]
    fn channels_are_reproducible_and_in_range() {
        let a = sample_channel(16, 7).unwrap();
        let b = sample_channel(16, 7).unwrap();
        let c = sample_channel(16, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.probs.iter().all(|&p| p > 0.0 && p < 1.0));
        assert!(sample_channel(0, 1).is_err());
        assert_eq!(sample_channel(1, 3).unwrap().num_symbols(), 1);
    }

    #[test]
    fn channel_probabilities_concentrate_around_half() {
        let ch = sample_channel(10_000, 42).unwrap();
        let mean = ch.probs.iter().sum::<f64>() / ch.probs.len() as f64;
        // Uniform(0,1): sd of the mean is sqrt(1/12/K).
        let tol = 3.0 * (1.0 / 12.0 / 10_000.0f64).sqrt();
        assert!((mean - 0.5).abs() < tol, "mean {mean}");
    }

    #[test]
    fn degenerate_channels_produce_constant_bits() {
        let ones = SyntheticChannel { probs: vec![1.0, 1.0], seed: 0 };
        let data = generate_pairs(&ones, 500, 3).unwrap();
        assert!(data.samples.iter().all(|&(_, b)| b == 1));
        let zeros = SyntheticChannel { probs: vec![0.0, 0.0], seed: 0 };
        let data = generate_pairs(&zeros, 500, 3).unwrap();
        assert!(data.samples.iter().all(|&(_, b)| b == 0));
    }

    #[test]
    fn per_symbol_rates_match_binomial_expectations() {
        let ch = SyntheticChannel { probs: vec![0.3, 0.8], seed: 0 };
        let n = 100_000;
        let data = generate_pairs(&ch, n, 9).unwrap();
        for sym in 0..2u32 {
            let total = data.samples.iter().filter(|&&(s, _)| s == sym).count();
            let ones = data.samples.iter().filter(|&&(s, b)| s == sym && b == 1).count();
            let rate = ones as f64 / total as f64;
            let p = ch.probs[sym as usize];
            let tol = 3.0 * (p * (1.0 - p) / total as f64).sqrt();
            assert!((rate - p).abs() < tol, "symbol {sym}: {rate} vs {p}");
        }
    }

    #[test]
    fn sparse_trainer_matches_the_generic_engine_exactly() {
        // Same graph, same schedule: the one-hot shortcut must reproduce
        // the generic path bit for bit.
        let k = 3;
        let ch = sample_channel(k, 5).unwrap();
        let data = generate_pairs(&ch, 600, 6).unwrap();
        let cfg = EstimatorConfig { passes: 2, batch_scale: 10, seed: 11, ..Default::default() };

        let mut sparse_graph = estimator_graph(k, cfg.seed).unwrap();
        train_estimator_sparse(&mut sparse_graph, &data, &cfg).unwrap();

        let mut generic_graph = estimator_graph(k, cfg.seed).unwrap();
        let samples: Vec<(Tensor<f64>, Target)> = data
            .samples
            .iter()
            .map(|&(sym, bit)| {
                (Tensor::one_hot(k, sym as usize).unwrap(), Target::Bits(vec![bit]))
            })
            .collect();
        let train_cfg = TrainConfig {
            batch_size: k * cfg.batch_scale,
            epochs: cfg.passes,
            seed: cfg.seed,
            adadelta: cfg.adadelta,
        };
        train(&mut generic_graph, &samples, LossKind::NegDoublingRate, &train_cfg).unwrap();

        for (a, b) in sparse_graph
            .params()
            .iter()
            .flatten()
            .zip(generic_graph.params().iter().flatten())
        {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn constant_half_channel_learns_half() {
        let ch = SyntheticChannel { probs: vec![0.5; 4], seed: 0 };
        let data = generate_pairs(&ch, 4 * 5_000, 2).unwrap();
        let cfg = EstimatorConfig { passes: 30, ..Default::default() };
        let q = train_estimator_with(&data, 4, &cfg).unwrap();
        for qi in &q {
            assert!((0.45..=0.55).contains(qi), "q = {qi}");
        }
    }

    #[test]
    fn near_deterministic_channel_reaches_the_corners() {
        let ch = SyntheticChannel { probs: vec![1e-3, 1.0 - 1e-3], seed: 0 };
        let data = generate_pairs(&ch, 2 * 50_000, 4).unwrap();
        let cfg = EstimatorConfig::default();
        let q = train_estimator_with(&data, 2, &cfg).unwrap();
        assert!(q[0] < 0.05, "q0 = {}", q[0]);
        assert!(q[1] > 0.95, "q1 = {}", q[1]);
    }

    #[test]
    fn missing_symbols_are_rejected() {
        let data = PairDataset { samples: vec![(0, 1), (0, 0)], num_symbols: 2 };
        assert!(train_estimator(&data, 2).is_err());
    }

    #[test]
    fn kl_divergence_properties() {
        assert_eq!(kl_divergence_bits(0.3, 0.3), 0.0);
        // Single pair p = 0.5, q = 0.25.
        let d = kl_divergence_bits(0.5, 0.25);
        let expect = 0.5 * 2.0f64.log2() + 0.5 * (2.0f64 / 3.0).log2();
        assert!((d - expect).abs() < 1e-12);
        assert!((d - 0.2075).abs() < 1e-4);
        // Nonnegative on a grid, zero only on the diagonal.
        for i in 1..20 {
            for j in 1..20 {
                let (p, q) = (i as f64 / 20.0, j as f64 / 20.0);
                let d = kl_divergence_bits(p, q);
                if i == j {
                    assert_eq!(d, 0.0);
                } else {
                    assert!(d > 0.0);
                }
            }
        }
    }

    #[test]
    fn kl_report_is_zero_on_the_truth() {
        let ch = sample_channel(8, 3).unwrap();
        let d = kl_report(&ch, &ch.probs).unwrap();
        assert!(d.abs() < 1e-12);
        assert!(kl_report(&ch, &[0.5; 4]).is_err());
    }

    #[test]
    fn trained_estimates_match_empirical_frequencies() {
        // Counting oracle, used only here: with independent outputs the
        // loss-minimizing q_i is the empirical bit-1 frequency.
        let k = 4;
        let ch = sample_channel(k, 21).unwrap();
        let data = generate_pairs(&ch, k * 5_000, 22).unwrap();
        let cfg = EstimatorConfig { passes: 60, ..Default::default() };
        let q = train_estimator_with(&data, k, &cfg).unwrap();
        for (sym, &qi) in q.iter().enumerate() {
            let total = data.samples.iter().filter(|&&(s, _)| s as usize == sym).count();
            let ones = data.samples.iter().filter(|&&(s, b)| s as usize == sym && b == 1).count();
            let freq = ones as f64 / total as f64;
            assert!(
                (qi - freq).abs() < 0.02,
                "symbol {sym}: trained {qi} vs counted {freq}"
            );
        }
    }

    #[test]
    fn trained_bettor_beats_the_uniform_bettor() {
        let k = 4;
        let ch = sample_channel(k, 31).unwrap();
        let train_data = generate_pairs(&ch, k * 5_000, 32).unwrap();
        let heldout = generate_pairs(&ch, k * 2_000, 33).unwrap();
        let cfg = EstimatorConfig { passes: 30, ..Default::default() };
        let q = train_estimator_with(&train_data, k, &cfg).unwrap();
        let trained = doubling_rate(&heldout, &q);
        let uniform = doubling_rate(&heldout, &vec![0.5; k]);
        assert!(
            trained >= uniform,
            "trained rate {trained} under uniform rate {uniform}"
        );
    }
}
