//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured numbers (run with `--nocapture` to see them).
//!
//! Criterion 5's second clause (a >= 10 point success gap between
//! p = 0.005 and p = 0.02 on a regular (3,6) n = 1024 code) is asserted
//! exactly as stated and fails: that code's belief-propagation cliff sits
//! near 7-8% (the (3,6) ensemble threshold is ~0.084), so both points
//! decode essentially perfectly. The assertion message carries the
//! measured rates.

use rand::RngExt;

use nrldpc_cli::config::{ExperimentConfig, RawConfig};
use nrldpc_cli::pipeline::{decode_segment, run_benchmark, DecodeMode, PipelineContext};
use nrldpc_cli::table2::{run_table2, Table2Options};

use nrldpc_core::bits::BitSegment;
use nrldpc_core::channel::{bsc_transmit, ChannelSpec};
use nrldpc_core::corpus::synth::{write_synthetic_corpus, ByteModel};
use nrldpc_core::nn::{
    negative_doubling_rate_loss, train, LayerGraph, LayerSpec, LossKind, Tensor, TrainConfig,
};
use nrldpc_core::nr::training::ftr_dataset;
use nrldpc_core::nr::{
    build_ftr_graph, ftr_classify, markov_oracle_decode, FileTypeModel, MarkovSource,
};
use nrldpc_core::util::keyed_rng;

#[test]
fn criterion_1_average_kl_divergence_sweep() {
    // Reduced N = K*5000 (30 passes): every K at or under 0.01.
    let reduced = run_table2(&Table2Options {
        k_values: vec![2, 4, 10, 100, 200],
        pairs_per_symbol: 5_000,
        passes: 30,
        epsilon: 1e-7,
        seed: 11,
    })
    .unwrap();
    for row in &reduced {
        assert!(
            row.delta_k <= 0.01,
            "K = {}: average KL divergence {} exceeds 0.01",
            row.k,
            row.delta_k
        );
    }
    // Full N = K*50000 for K in {2, 4} (default 3 passes): under 0.002.
    let full = run_table2(&Table2Options {
        k_values: vec![2, 4],
        pairs_per_symbol: 50_000,
        passes: 3,
        epsilon: 1e-7,
        seed: 11,
    })
    .unwrap();
    for row in &full {
        assert!(
            row.delta_k <= 0.002,
            "K = {} at full N: average KL divergence {} exceeds 0.002",
            row.k,
            row.delta_k
        );
    }
    let summary: Vec<String> =
        reduced.iter().chain(&full).map(|r| format!("K={} Δ={:.6}", r.k, r.delta_k)).collect();
    println!("[PASS] criterion 1: channel estimation sweep — {}", summary.join(", "));
}

#[test]
fn criterion_2_gradient_correctness() {
    // Central finite differences against the backward pass for every
    // layer type alone and a 5-layer composite.
    const STEP: f64 = 1e-5;
    const TOL: f64 = 1e-4;

    fn check(graph: &mut LayerGraph<f64>, input: &Tensor<f64>, probe_seed: u64) -> f64 {
        let out_len: usize = graph.output_shape().unwrap().iter().product();
        let mut rng = keyed_rng(probe_seed, 0, 0);
        let weights: Vec<f64> = (0..out_len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let eval = |g: &LayerGraph<f64>, x: &Tensor<f64>| -> f64 {
            g.predict(x).unwrap().data().iter().zip(&weights).map(|(a, b)| a * b).sum()
        };
        let cache = graph.forward(input).unwrap();
        let grad = Tensor::new(cache.output().shape().to_vec(), weights.clone()).unwrap();
        let analytic = graph.backward(&cache, &grad).unwrap();

        let mut worst = 0.0f64;
        let mut track = |fd: f64, an: f64| {
            let scale = fd.abs().max(an.abs());
            if scale > 1e-8 {
                worst = worst.max((fd - an).abs() / scale);
            }
        };
        for layer in 0..graph.specs().len() {
            for slot in 0..graph.params()[layer].len() {
                for idx in 0..graph.params()[layer][slot].len() {
                    let orig = graph.params()[layer][slot].data()[idx];
                    graph.params_mut()[layer][slot].data_mut()[idx] = orig + STEP;
                    let plus = eval(graph, input);
                    graph.params_mut()[layer][slot].data_mut()[idx] = orig - STEP;
                    let minus = eval(graph, input);
                    graph.params_mut()[layer][slot].data_mut()[idx] = orig;
                    track((plus - minus) / (2.0 * STEP), analytic.params[layer][slot].data()[idx]);
                }
            }
        }
        let mut x = input.clone();
        for idx in 0..x.len() {
            let orig = x.data()[idx];
            x.data_mut()[idx] = orig + STEP;
            let plus = eval(graph, &x);
            x.data_mut()[idx] = orig - STEP;
            let minus = eval(graph, &x);
            x.data_mut()[idx] = orig;
            track((plus - minus) / (2.0 * STEP), analytic.input.data()[idx]);
        }
        worst
    }

    fn away_from_kinks(shape: Vec<usize>, seed: u64) -> Tensor<f64> {
        let mut rng = keyed_rng(seed, 1, 0);
        let len = shape.iter().product();
        let data = (0..len)
            .map(|_| {
                let sign = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
                sign * rng.random_range(0.1..1.5)
            })
            .collect();
        Tensor::new(shape, data).unwrap()
    }

    let cases: Vec<(&str, Vec<usize>, Vec<LayerSpec>)> = vec![
        ("dense", vec![6], vec![LayerSpec::Dense { out: 4 }]),
        ("conv1d", vec![2, 12], vec![LayerSpec::Conv1d { filters: 3, width: 3 }]),
        (
            "deconv1d",
            vec![2, 7],
            vec![LayerSpec::Deconv1d { filters: 3, width: 3, stride: 2 }],
        ),
        ("maxpool1d", vec![2, 9], vec![LayerSpec::MaxPool1d { window: 2, stride: 2 }]),
        ("relu", vec![1, 10], vec![LayerSpec::Relu]),
        ("sigmoid", vec![1, 10], vec![LayerSpec::Sigmoid]),
        (
            "composite",
            vec![1, 18],
            vec![
                LayerSpec::Conv1d { filters: 4, width: 3 },
                LayerSpec::Relu,
                LayerSpec::MaxPool1d { window: 2, stride: 2 },
                LayerSpec::Dense { out: 5 },
                LayerSpec::Sigmoid,
            ],
        ),
    ];
    let mut worst = 0.0f64;
    for (i, (name, shape, specs)) in cases.into_iter().enumerate() {
        let mut graph = LayerGraph::new(shape.clone(), specs, 100 + i as u64).unwrap();
        let err = check(&mut graph, &away_from_kinks(shape, 200 + i as u64), 300 + i as u64);
        assert!(err < TOL, "{name}: max relative error {err}");
        worst = worst.max(err);
    }
    println!("[PASS] criterion 2: gradient checks — worst relative error {worst:.2e}");
}

#[test]
fn criterion_3_oracle_matches_exhaustive_enumeration() {
    // Independent oracle: sum over all 2^k clean sequences.
    fn brute_force(noisy: &[u8], source: &MarkovSource, p: f64) -> Vec<f64> {
        let k = noisy.len();
        let states = source.num_states();
        let mut num = vec![0.0f64; k];
        let mut den = 0.0f64;
        for word in 0u64..(1 << k) {
            let bits: Vec<u8> = (0..k).map(|i| ((word >> (k - 1 - i)) & 1) as u8).collect();
            let mut prob = 0.0;
            for s0 in 0..states {
                let mut path = source.initial()[s0];
                let mut s = s0;
                for &x in &bits {
                    let t = source.transitions()[s];
                    path *= if x == 1 { t } else { 1.0 - t };
                    s = ((s << 1) | x as usize) & (states - 1);
                }
                prob += path;
            }
            for (i, &x) in bits.iter().enumerate() {
                prob *= if noisy[i] == x { 1.0 - p } else { p };
            }
            den += prob;
            for (i, &x) in bits.iter().enumerate() {
                if x == 1 {
                    num[i] += prob;
                }
            }
        }
        num.iter().map(|n| n / den).collect()
    }

    let sources = [
        MarkovSource::bernoulli(0.62).unwrap(),
        MarkovSource::with_uniform_initial(1, vec![0.15, 0.85]).unwrap(),
        MarkovSource::with_uniform_initial(2, vec![0.03, 0.45, 0.55, 0.97]).unwrap(),
        MarkovSource::new(
            3,
            vec![0.1, 0.3, 0.2, 0.8, 0.7, 0.4, 0.9, 0.6],
            vec![0.3, 0.1, 0.05, 0.05, 0.2, 0.1, 0.1, 0.1],
        )
        .unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for (si, source) in sources.iter().enumerate() {
        for (pi, &p) in [0.01, 0.08, 0.25, 0.5].iter().enumerate() {
            for k in [1usize, 3, 6, 9, 12] {
                let noisy = source.sample_seeded(k, 900 + si as u64, (pi * 100 + k) as u64);
                let exact = markov_oracle_decode::<f64>(&noisy, source, p).unwrap();
                let brute = brute_force(&noisy, source, p);
                for (a, b) in exact.q().iter().zip(&brute) {
                    worst = worst.max((a - b).abs());
                }
                cases += 1;
            }
        }
    }
    assert!(worst < 1e-9, "max abs diff {worst} over {cases} cases");
    println!(
        "[PASS] criterion 3: exact posterior vs exhaustive enumeration — max abs diff {worst:.2e} over {cases} cases"
    );
}

#[test]
fn criterion_4_loss_identity() {
    // The negative doubling rate is natural-log binary cross entropy
    // scaled by 1/ln 2, to 1e-12, over 1e5 random (q, b).
    let mut rng = keyed_rng(4242, 0, 0);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let q: f64 = rng.random_range(1e-6..1.0 - 1e-6);
        let b: u8 = rng.random_range(0..=1);
        let (loss, _) = negative_doubling_rate_loss(&[q], &[b]).unwrap();
        let bce_nat = if b == 1 { -q.ln() } else { -(1.0 - q).ln() };
        worst = worst.max((loss - bce_nat / std::f64::consts::LN_2).abs());
    }
    assert!(worst < 1e-12, "max abs diff {worst}");
    println!("[PASS] criterion 4: loss identity — max abs diff {worst:.2e} over 1e5 samples");
}

#[test]
fn criterion_5_ecc_baseline_sanity() {
    // On a seeded regular (3,6) code with n = 1024: p = 0 gives 100%
    // success, and success at p = 0.005 must exceed success at p = 0.02
    // by at least 10 points over >= 2000 paired trials.
    let raw = RawConfig::parse(
        "code = gallager:1024:2024\nber_grid = 0.5%,2%\nmodes = ldpc-only\ntrials = 2000\nsource = markov:uniform\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::from_raw(&raw, 5).unwrap();

    // p = 0 over the same trial count, through the decode path directly
    // (the benchmark grid is restricted to (0, 0.5) by its invariant).
    let ctx = PipelineContext::load(&cfg).unwrap();
    let source = MarkovSource::bernoulli(0.5).unwrap();
    for trial in 0..2000u64 {
        let info = BitSegment::from_bits(source.sample_seeded(ctx.code.k(), 50, trial)).unwrap();
        let cw = ctx.code.encode(&info).unwrap();
        let (decoded, diag) = decode_segment(&ctx, &cw, DecodeMode::LdpcOnly, 0.0).unwrap();
        assert_eq!(decoded, info.bits(), "p = 0 must decode perfectly");
        assert_eq!(diag.iters, 0, "p = 0 must decode before the first update");
    }

    let (result, _) = run_benchmark(&cfg).unwrap();
    let rate_at = |ber: f64| -> f64 {
        result
            .rows
            .iter()
            .find(|r| (r.ber - ber).abs() < 1e-12)
            .map(|r| r.rate)
            .expect("row present")
    };
    let low = rate_at(0.005);
    let high = rate_at(0.02);
    println!(
        "criterion 5 measured: p=0 rate 1.0000 (2000 trials), p=0.005 rate {low:.4}, p=0.02 rate {high:.4}, gap {:.1} points",
        (low - high) * 100.0
    );
    assert!(
        low - high >= 0.10,
        "success(p=0.005) = {low:.4} does not exceed success(p=0.02) = {high:.4} by >= 10 points on the (3,6) n=1024 code: \
         its belief-propagation cliff sits near p = 0.07-0.09 (ensemble threshold ~0.084), so both stated points decode \
         essentially perfectly; the stated gap would require a rate-matched high-rate code instead"
    );
    println!("[PASS] criterion 5: ECC baseline sanity");
}

/// Shared gain benchmark: order-2 source with strong redundancy across
/// the measured ldpc-only cliff, 1000 paired trials per point. Consumed
/// by criterion 6 and by the monotonicity/dominance properties below.
static GAIN_BENCH: std::sync::LazyLock<(
    ExperimentConfig,
    nrldpc_cli::report::BenchmarkResult,
    Vec<nrldpc_cli::report::TrialRecord>,
)> = std::sync::LazyLock::new(|| {
    let raw = RawConfig::parse(
        "code = gallager:1024:2024\nber_grid = 7%,7.5%,8%,8.5%,9%\nmodes = ldpc-only,oracle-nr-ldpc\ntrials = 1000\nsource = markov:runs:2:0.97\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::from_raw(&raw, 6).unwrap();
    let (result, records) = run_benchmark(&cfg).unwrap();
    (cfg, result, records)
});

#[test]
fn criterion_6_natural_redundancy_gain() {
    // Oracle-fused decoding must beat ldpc-only by >= 15 points at >= 3
    // consecutive BER points beyond the ldpc-only cliff.
    let (cfg, result, _) = &*GAIN_BENCH;

    let mut lines = Vec::new();
    let mut consecutive = 0usize;
    let mut best_run = 0usize;
    for &ber in &cfg.ber_grid {
        let rate = |mode: &str| -> f64 {
            result
                .rows
                .iter()
                .find(|r| (r.ber - ber).abs() < 1e-12 && r.mode == mode)
                .map(|r| r.rate)
                .expect("row present")
        };
        let ldpc = rate("ldpc-only");
        let oracle = rate("oracle-nr-ldpc");
        let beyond_cliff = ldpc <= 0.85;
        let qualifies = beyond_cliff && oracle > ldpc && oracle - ldpc >= 0.15;
        lines.push(format!(
            "ber {ber}: ldpc-only {ldpc:.3}, oracle-nr-ldpc {oracle:.3}{}",
            if qualifies { " (qualifying)" } else { "" }
        ));
        if qualifies {
            consecutive += 1;
            best_run = best_run.max(consecutive);
        } else {
            consecutive = 0;
        }
    }
    for line in &lines {
        println!("criterion 6 measured: {line}");
    }
    assert!(
        best_run >= 3,
        "need >= 3 consecutive qualifying points beyond the cliff, got {best_run}:\n{}",
        lines.join("\n")
    );
    println!(
        "[PASS] criterion 6: natural-redundancy gain — {best_run} consecutive points with >= 15 point margin"
    );
}

#[test]
fn property_success_rate_monotone_in_ber() {
    // ldpc-only success is monotone non-increasing in BER up to a 3-sigma
    // binomial band, over the shared 1000-trial-per-point run.
    let (cfg, result, _) = &*GAIN_BENCH;
    let rates: Vec<(f64, f64, u64)> = cfg
        .ber_grid
        .iter()
        .map(|&ber| {
            let row = result
                .rows
                .iter()
                .find(|r| (r.ber - ber).abs() < 1e-12 && r.mode == "ldpc-only")
                .expect("row present");
            (ber, row.rate, row.trials)
        })
        .collect();
    for pair in rates.windows(2) {
        let (ber_lo, rate_lo, n_lo) = pair[0];
        let (ber_hi, rate_hi, n_hi) = pair[1];
        let sigma = |r: f64, n: u64| (r * (1.0 - r) / n as f64).sqrt();
        let band = 3.0 * (sigma(rate_lo, n_lo) + sigma(rate_hi, n_hi));
        assert!(
            rate_hi <= rate_lo + band,
            "success rate rose from {rate_lo:.4} at {ber_lo} to {rate_hi:.4} at {ber_hi} (band {band:.4})"
        );
    }
    println!("property: ldpc-only success rate monotone non-increasing across the grid");
}

#[test]
fn property_paired_dominance_report() {
    // Over identical noise masks, compare per-segment outcomes of the two
    // modes. Reported, not assumed.
    let (_, _, records) = &*GAIN_BENCH;
    use std::collections::HashMap;
    let mut by_trial: HashMap<(u64, u64), [Option<bool>; 2]> = HashMap::new();
    for r in records {
        let key = ((r.ber * 1e6) as u64, r.trial);
        let entry = by_trial.entry(key).or_default();
        match r.mode {
            DecodeMode::LdpcOnly => entry[0] = Some(r.success),
            DecodeMode::OracleNrLdpc => entry[1] = Some(r.success),
            DecodeMode::NrLdpc => {}
        }
    }
    let mut both = 0usize;
    let mut only_ldpc = 0usize;
    let mut only_oracle = 0usize;
    let mut neither = 0usize;
    for [ldpc, oracle] in by_trial.values() {
        match (ldpc.unwrap(), oracle.unwrap()) {
            (true, true) => both += 1,
            (true, false) => only_ldpc += 1,
            (false, true) => only_oracle += 1,
            (false, false) => neither += 1,
        }
    }
    println!(
        "property: paired dominance over {} shared-mask trials — both {both}, oracle-only {only_oracle}, ldpc-only {only_ldpc}, neither {neither}",
        by_trial.len()
    );
}

#[test]
fn criterion_7_file_type_recognition_desk_scale() {
    // Four synthetic types, >= 200 test segments per type, noise at
    // p = 1.2%: a scaled recognizer must reach 90% accuracy.
    const K: usize = 256;
    const BER: f64 = 0.012;
    let dir = std::env::temp_dir().join(format!("acceptance-ftr-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let types = vec![
        ("markup".to_string(), ByteModel::Markup),
        ("text".to_string(), ByteModel::Text),
        ("packed".to_string(), ByteModel::Uniform),
        ("table".to_string(), ByteModel::Periodic { period: vec![0x7F, 0x00, 0x42, 0x10] }),
    ];
    let registry: Vec<String> = types.iter().map(|(l, _)| l.clone()).collect();
    // 40 files x 1024 bytes per type = 32 segments per file at k = 256:
    // 1280 segments per type, a quarter held out for testing.
    let roots = write_synthetic_corpus(&dir, &types, 40, 1024, 77).unwrap();

    let manifest = nrldpc_core::corpus::CorpusManifest::scan(&roots, &registry).unwrap();
    let splits = nrldpc_core::corpus::split_dataset(&manifest, K, &[0.75, 0.25], 78).unwrap();
    let mut loader = nrldpc_core::corpus::SegmentLoader::new(&manifest, K);
    let load = |loader: &mut nrldpc_core::corpus::SegmentLoader,
                refs: &[nrldpc_core::corpus::SegmentRef]| {
        refs.iter()
            .map(|r| loader.load(r))
            .collect::<nrldpc_core::Result<Vec<BitSegment>>>()
            .unwrap()
    };
    let train_segments = load(&mut loader, &splits[0]);
    let test_segments = load(&mut loader, &splits[1]);
    for label_idx in 0..registry.len() {
        let count = test_segments.iter().filter(|s| s.label() == Some(label_idx)).count();
        assert!(count >= 200, "only {count} test segments for type {label_idx}");
    }

    let data = ftr_dataset(&train_segments, BER, 79).unwrap();
    let graph = build_ftr_graph::<f64>(K, registry.len(), 8, 16, 80).unwrap();
    let mut model = FileTypeModel::new(graph, registry.clone(), K, BER).unwrap();
    let cfg = TrainConfig { batch_size: 100, epochs: 12, seed: 81, ..Default::default() };
    train(&mut model.graph, &data, LossKind::CrossEntropy, &cfg).unwrap();

    let mut hits = 0usize;
    for (idx, seg) in test_segments.iter().enumerate() {
        let spec = ChannelSpec::new(BER, 82, idx as u64).unwrap();
        let noisy = bsc_transmit(seg, &spec);
        let (predicted, _) = ftr_classify(&noisy, &model).unwrap();
        hits += usize::from(Some(predicted) == seg.label());
    }
    let accuracy = hits as f64 / test_segments.len() as f64;
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(
        accuracy >= 0.90,
        "test accuracy {accuracy:.4} below 0.90 over {} segments",
        test_segments.len()
    );
    println!(
        "[PASS] criterion 7: file-type recognition — accuracy {:.2}% on {} noisy test segments",
        accuracy * 100.0,
        test_segments.len()
    );
}

#[test]
fn criterion_8_determinism_audit() {
    // The bench subcommand, replayed with the logged seed, must reproduce
    // byte-identical CSV, and a tampered recording must exit with code 3.
    let dir = std::env::temp_dir().join(format!("acceptance-replay-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("bench.cfg");
    std::fs::write(
        &config_path,
        "code = gallager:96:5\nber_grid = 2%,4%\nmodes = ldpc-only,oracle-nr-ldpc\ntrials = 50\nsource = markov:runs:2:0.95\n",
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_nrldpc");
    let run = |out: &str, replay: Option<&std::path::Path>| {
        let mut cmd = std::process::Command::new(bin);
        cmd.arg("bench")
            .arg("--config")
            .arg(&config_path)
            .arg("--seed")
            .arg("31")
            .arg("--out-dir")
            .arg(dir.join(out));
        if let Some(prev) = replay {
            cmd.arg("--replay").arg(prev);
        }
        cmd.output().expect("bench runs")
    };

    let first = run("a", None);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let first_csv = dir.join("a").join("results.csv");

    let second = run("b", Some(&first_csv));
    assert!(second.status.success(), "{}", String::from_utf8_lossy(&second.stderr));
    let a = std::fs::read(&first_csv).unwrap();
    let b = std::fs::read(dir.join("b").join("results.csv")).unwrap();
    assert_eq!(a, b, "replayed results.csv differs");

    // Tamper with the recording: the replay must detect it and exit 3.
    let mut tampered = String::from_utf8(a).unwrap();
    tampered.push_str("ghost,row\n");
    let tampered_path = dir.join("tampered.csv");
    std::fs::write(&tampered_path, tampered).unwrap();
    let third = run("c", Some(&tampered_path));
    assert_eq!(third.status.code(), Some(3), "tampered replay must exit 3");

    std::fs::remove_dir_all(&dir).unwrap();
    println!("[PASS] criterion 8: determinism audit — byte-identical replay, tamper detected");
}
