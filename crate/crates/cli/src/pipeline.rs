//! The end-to-end decoding pipeline and the paired-trial benchmark.
//!
//! Pipeline order for a noisy codeword: recognize the file type from the k
//! noisy information bits, route to that type's soft decoder, fuse its
//! posterior with the channel LLRs, run belief propagation. The
//! `ldpc-only` mode skips recognition and fusion entirely;
//! `oracle-nr-ldpc` replaces the learned decoder with the exact
//! Markov-source oracle.
//!
//! Benchmarks draw one segment and one noise substream per trial index, so
//! every mode — and every BER point — decodes against identical data and
//! aligned noise (common random numbers): the flip set at a lower BER is a
//! subset of the flip set at a higher one.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use nrldpc_core::bits::BitSegment;
use nrldpc_core::channel::{channel_llrs, noise_mask, ChannelSpec};
use nrldpc_core::corpus::{CorpusManifest, SegmentLoader};
use nrldpc_core::ldpc::{bp_decode, ParityCheckCode};
use nrldpc_core::nr::{
    ftr_classify, llr_fusion, FileTypeModel, MarkovOracleDecoder, NeuralSoftDecoder, SoftDecoder,
};
use nrldpc_core::util::{domain, mix64};

use crate::coderef::load_code;
use crate::config::{ExperimentConfig, SourceSpec};
use crate::error::{CliError, CliResult};
use crate::markov_spec::parse_markov_spec;
use crate::report::{BenchmarkResult, TrialRecord};

/// Decoding strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DecodeMode {
    /// Channel LLRs straight into belief propagation.
    LdpcOnly,
    /// File-type recognition, learned soft decoder, fusion, BP.
    NrLdpc,
    /// Exact Markov-source posterior, fusion, BP.
    OracleNrLdpc,
}

impl std::fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecodeMode::LdpcOnly => "ldpc-only",
            DecodeMode::NrLdpc => "nr-ldpc",
            DecodeMode::OracleNrLdpc => "oracle-nr-ldpc",
        })
    }
}

impl FromStr for DecodeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ldpc-only" => Ok(DecodeMode::LdpcOnly),
            "nr-ldpc" => Ok(DecodeMode::NrLdpc),
            "oracle-nr-ldpc" => Ok(DecodeMode::OracleNrLdpc),
            other => Err(format!(
                "unknown mode {other:?} (expected ldpc-only, nr-ldpc or oracle-nr-ldpc)"
            )),
        }
    }
}

/// Everything loaded and validated before any trial runs.
pub struct PipelineContext {
    pub code: ParityCheckCode,
    pub max_iters: usize,
    pub registry: Vec<String>,
    pub ftr: Option<FileTypeModel<f64>>,
    pub soft: BTreeMap<String, Arc<dyn SoftDecoder>>,
    pub oracle: Option<Arc<MarkovOracleDecoder>>,
}

/// Per-segment decode diagnostics.
#[derive(Debug, Clone)]
pub struct SegmentDiagnostics {
    pub converged: bool,
    pub iters: usize,
    pub ftr_predicted: Option<String>,
    pub decoder_used: Option<String>,
}

impl PipelineContext {
    /// Bare context: code only, no soft decoders. Callers fill in models
    /// through the public fields.
    pub fn new(code: ParityCheckCode, max_iters: usize, registry: Vec<String>) -> Self {
        Self { code, max_iters, registry, ftr: None, soft: BTreeMap::new(), oracle: None }
    }

    /// Load the code and whichever models the requested modes need,
    /// failing before any compute is spent. Model metadata must match the
    /// code dimensions and the configured training BER unless `force`.
    pub fn load(cfg: &ExperimentConfig) -> CliResult<Self> {
        let code = load_code(&cfg.code)?;
        let k = code.k();
        let mut ftr = None;
        let mut soft: BTreeMap<String, Arc<dyn SoftDecoder>> = BTreeMap::new();
        let mut oracle = None;

        if cfg.modes.contains(&DecodeMode::NrLdpc) {
            let path = cfg
                .ftr_model
                .as_ref()
                .ok_or_else(|| CliError::usage("nr-ldpc mode needs `ftr_model`"))?;
            let model = FileTypeModel::<f64>::load(path)?;
            validate_meta(
                "file-type model",
                cfg.force,
                &[
                    (model.input_len == k, format!("input length {} vs code k {k}", model.input_len)),
                    (
                        model.registry == cfg.registry,
                        format!("registry {:?} vs configured {:?}", model.registry, cfg.registry),
                    ),
                    (
                        (model.trained_ber - cfg.p_dnn).abs() < 1e-12,
                        format!("trained BER {} vs p_dnn {}", model.trained_ber, cfg.p_dnn),
                    ),
                ],
            )?;
            ftr = Some(model);

            for label in &cfg.registry {
                let path = cfg
                    .soft_decoders
                    .iter()
                    .find(|(l, _)| l == label)
                    .map(|(_, p)| p)
                    .ok_or_else(|| {
                        CliError::usage(format!("nr-ldpc mode needs `softdec.{label}`"))
                    })?;
                let dec = NeuralSoftDecoder::load(path)?;
                validate_meta(
                    &format!("soft decoder for {label}"),
                    cfg.force,
                    &[
                        (dec.segment_len == k, format!("segment length {} vs code k {k}", dec.segment_len)),
                        (dec.file_type == *label, format!("file type {} vs {label}", dec.file_type)),
                        (
                            (dec.trained_ber - cfg.p_dnn).abs() < 1e-12,
                            format!("trained BER {} vs p_dnn {}", dec.trained_ber, cfg.p_dnn),
                        ),
                    ],
                )?;
                soft.insert(label.clone(), Arc::new(dec));
            }
        }

        if cfg.modes.contains(&DecodeMode::OracleNrLdpc) {
            let SourceSpec::Markov(spec) = &cfg.source else {
                return Err(CliError::usage(
                    "oracle-nr-ldpc mode needs a markov `source` (the oracle must know the true statistics)",
                ));
            };
            let source = parse_markov_spec(spec)?;
            let label = cfg.registry.first().cloned().unwrap_or_else(|| "markov".into());
            oracle = Some(Arc::new(MarkovOracleDecoder::new(source, k, &label)));
        }

        Ok(Self {
            code,
            max_iters: cfg.max_iters,
            registry: cfg.registry.clone(),
            ftr,
            soft,
            oracle,
        })
    }
}

fn validate_meta(what: &str, force: bool, checks: &[(bool, String)]) -> CliResult<()> {
    for (ok, detail) in checks {
        if !ok {
            if force {
                eprintln!("warning: {what}: {detail} (continuing under --force)");
            } else {
                return Err(CliError::data(format!(
                    "{what}: {detail} (pass --force to use it anyway)"
                )));
            }
        }
    }
    Ok(())
}

/// Decode one noisy codeword (storage order) under the given mode and
/// channel BER. Returns the recovered information bits and diagnostics.
pub fn decode_segment(
    ctx: &PipelineContext,
    noisy: &BitSegment,
    mode: DecodeMode,
    p: f64,
) -> CliResult<(Vec<u8>, SegmentDiagnostics)> {
    if noisy.len() != ctx.code.n() {
        return Err(CliError::data(format!(
            "noisy word has {} bits, code length is {}",
            noisy.len(),
            ctx.code.n()
        )));
    }
    let k = ctx.code.k();
    let (channel, _) = channel_llrs::<f64>(noisy.bits(), p);
    let info_seg = BitSegment::from_bits(noisy.bits()[..k].to_vec()).expect("bits");
    // The oracle's exact posterior is undefined at p = 0; an epsilon
    // channel gives the same (certainty) limit.
    let p_soft = p.clamp(1e-9, 0.5);

    let mut ftr_predicted = None;
    let mut decoder_used = None;
    let init = match mode {
        DecodeMode::LdpcOnly => channel,
        DecodeMode::NrLdpc => {
            let ftr = ctx
                .ftr
                .as_ref()
                .ok_or_else(|| CliError::usage("nr-ldpc mode without a loaded file-type model"))?;
            let (type_idx, _scores) = ftr_classify(&info_seg, ftr)?;
            let label = ftr.registry[type_idx].clone();
            let decoder = ctx.soft.get(&label).ok_or_else(|| {
                CliError::data(format!("no soft decoder loaded for type {label:?}"))
            })?;
            let posterior = decoder.decode(&info_seg, p_soft)?;
            ftr_predicted = Some(label.clone());
            decoder_used = Some(label);
            llr_fusion(&channel, &posterior)?
        }
        DecodeMode::OracleNrLdpc => {
            let oracle = ctx
                .oracle
                .as_ref()
                .ok_or_else(|| CliError::usage("oracle-nr-ldpc mode without a source"))?;
            let posterior = oracle.decode(&info_seg, p_soft)?;
            decoder_used = Some(format!("oracle:{}", oracle.file_type()));
            llr_fusion(&channel, &posterior)?
        }
    };

    let outcome = bp_decode(&init, &ctx.code, ctx.max_iters)?;
    let info = outcome.info_bits(&ctx.code);
    Ok((
        info,
        SegmentDiagnostics {
            converged: outcome.converged,
            iters: outcome.iters_used,
            ftr_predicted,
            decoder_used,
        },
    ))
}

/// Clean information segments for benchmark trials, with their type label.
enum BenchSource {
    Markov { source: nrldpc_core::nr::MarkovSource, label: String },
    Corpus { segments: Vec<(BitSegment, String)> },
}

impl BenchSource {
    fn load(cfg: &ExperimentConfig, k: usize) -> CliResult<Self> {
        match &cfg.source {
            SourceSpec::Markov(spec) => Ok(BenchSource::Markov {
                source: parse_markov_spec(spec)?,
                label: cfg.registry.first().cloned().unwrap_or_else(|| "markov".into()),
            }),
            SourceSpec::Corpus(path) => {
                let manifest = CorpusManifest::read_jsonl(path, &cfg.registry)?;
                let mut loader = SegmentLoader::new(&manifest, k);
                let mut segments = Vec::new();
                for (file_idx, entry) in manifest.entries.iter().enumerate() {
                    let count = (entry.bytes as usize * 8) / k;
                    for seg_idx in 0..count {
                        let seg = loader
                            .load(&nrldpc_core::corpus::SegmentRef { file_idx, seg_idx })?;
                        segments.push((seg, entry.label.clone()));
                    }
                }
                if segments.is_empty() {
                    return Err(CliError::data("corpus yields no segments at this k"));
                }
                Ok(BenchSource::Corpus { segments })
            }
        }
    }

    fn draw(&self, k: usize, seed: u64, trial: u64) -> (BitSegment, String) {
        match self {
            BenchSource::Markov { source, label } => {
                let bits = source.sample_seeded(k, seed, trial);
                (BitSegment::from_bits(bits).expect("bits"), label.clone())
            }
            BenchSource::Corpus { segments } => {
                let (seg, label) = &segments[(trial as usize) % segments.len()];
                (seg.clone(), label.clone())
            }
        }
    }
}

/// Run the full benchmark: every BER in the grid, every mode, `trials`
/// paired trials. Returns the aggregated result and the per-trial log.
pub fn run_benchmark(cfg: &ExperimentConfig) -> CliResult<(BenchmarkResult, Vec<TrialRecord>)> {
    let ctx = PipelineContext::load(cfg)?;
    let source = BenchSource::load(cfg, ctx.code.k())?;

    let mut records: Vec<TrialRecord> = Vec::new();
    for &ber in &cfg.ber_grid {
        let mut at_ber: Vec<Vec<TrialRecord>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| -> CliResult<Vec<TrialRecord>> {
                let (info, label) = source.draw(ctx.code.k(), cfg.seed, trial);
                let codeword = ctx.code.encode(&info)?;
                let noise_stream = mix64(&[domain::NOISE, trial]);
                let spec = ChannelSpec::new(ber, cfg.seed, noise_stream)
                    .map_err(|e| CliError::usage(e.to_string()))?;
                let mask = noise_mask(codeword.len(), &spec);
                let noisy = codeword.xor(&mask)?;
                let mut out = Vec::with_capacity(cfg.modes.len());
                for &mode in &cfg.modes {
                    let (decoded, diag) = decode_segment(&ctx, &noisy, mode, ber)?;
                    out.push(TrialRecord {
                        ber,
                        mode,
                        trial,
                        noise_stream,
                        file_type: label.clone(),
                        success: decoded == info.bits(),
                        converged: diag.converged,
                        iters: diag.iters,
                        ftr_predicted: diag.ftr_predicted,
                    });
                }
                Ok(out)
            })
            .collect::<CliResult<_>>()?;
        for trial_records in at_ber.drain(..) {
            records.extend(trial_records);
        }
    }

    let result = BenchmarkResult::from_records(&records, &cfg.config_hash, cfg.seed);
    Ok((result, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    fn markov_config(extra: &str) -> ExperimentConfig {
        let text = format!(
            "code = gallager:96:5\nber_grid = 1%,3%\nmodes = ldpc-only,oracle-nr-ldpc\ntrials = 40\nsource = markov:runs:2:0.95\n{extra}"
        );
        let raw = RawConfig::parse(&text).unwrap();
        ExperimentConfig::from_raw(&raw, 77).unwrap()
    }

    #[test]
    fn noiseless_segments_decode_in_zero_iterations() {
        let cfg = markov_config("");
        let ctx = PipelineContext::load(&cfg).unwrap();
        let source = parse_markov_spec("runs:2:0.95").unwrap();
        for mode in [DecodeMode::LdpcOnly, DecodeMode::OracleNrLdpc] {
            let info =
                BitSegment::from_bits(source.sample_seeded(ctx.code.k(), 3, 1)).unwrap();
            let codeword = ctx.code.encode(&info).unwrap();
            let (decoded, diag) = decode_segment(&ctx, &codeword, mode, 0.0).unwrap();
            assert_eq!(decoded, info.bits(), "{mode}");
            assert!(diag.converged);
            assert_eq!(diag.iters, 0, "{mode}");
        }
    }

    #[test]
    fn ldpc_only_reports_no_ftr() {
        let cfg = markov_config("");
        let ctx = PipelineContext::load(&cfg).unwrap();
        let info = BitSegment::zeros(ctx.code.k());
        let codeword = ctx.code.encode(&info).unwrap();
        let (_, diag) = decode_segment(&ctx, &codeword, DecodeMode::LdpcOnly, 0.01).unwrap();
        assert!(diag.ftr_predicted.is_none());
        assert!(diag.decoder_used.is_none());
    }

    #[test]
    fn modes_share_noise_streams_and_results_replay() {
        let cfg = markov_config("");
        let (a, records_a) = run_benchmark(&cfg).unwrap();
        let (b, records_b) = run_benchmark(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        // Paired design: for each (ber, trial) all modes saw one stream.
        use std::collections::HashMap;
        let mut streams: HashMap<(String, u64), Vec<u64>> = HashMap::new();
        for r in &records_a {
            streams
                .entry((format!("{}", r.ber), r.trial))
                .or_default()
                .push(r.noise_stream);
        }
        for (_, s) in streams {
            assert_eq!(s.len(), 2);
            assert_eq!(s[0], s[1]);
        }
        let _ = records_b;
    }

    #[test]
    fn oracle_mode_beats_ldpc_only_beyond_the_threshold() {
        // Strongly redundant source, BER where the bare code struggles at
        // this short length: the oracle-fused decoder must win on the
        // same noise masks.
        let text = "code = gallager:96:5\nber_grid = 4%\nmodes = ldpc-only,oracle-nr-ldpc\ntrials = 120\nsource = markov:runs:2:0.97\n";
        let raw = RawConfig::parse(text).unwrap();
        let cfg = ExperimentConfig::from_raw(&raw, 9).unwrap();
        let (result, _) = run_benchmark(&cfg).unwrap();
        let rate = |mode: &str| {
            result
                .rows
                .iter()
                .find(|r| r.mode == mode)
                .map(|r| r.rate)
                .unwrap()
        };
        assert!(
            rate("oracle-nr-ldpc") > rate("ldpc-only"),
            "oracle {} vs ldpc {}",
            rate("oracle-nr-ldpc"),
            rate("ldpc-only")
        );
    }

    #[test]
    fn far_below_threshold_the_bare_code_is_nearly_perfect() {
        // 0.2% on a code whose decoding threshold is far higher.
        let raw = RawConfig::parse(
            "code = gallager:1024:2024\nber_grid = 0.2%\nmodes = ldpc-only\ntrials = 300\nsource = markov:uniform\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_raw(&raw, 14).unwrap();
        let (result, _) = run_benchmark(&cfg).unwrap();
        assert!(result.rows[0].rate >= 0.99, "rate {}", result.rows[0].rate);
    }

    #[test]
    fn missing_models_fail_before_any_compute() {
        let cfg = markov_config("modes = nr-ldpc\n");
        // Re-parse with nr-ldpc mode.
        let raw = RawConfig::parse(
            "code = gallager:96:5\nber_grid = 1%\nmodes = nr-ldpc\ntrials = 5\nsource = markov:uniform\n",
        )
        .unwrap();
        let cfg2 = ExperimentConfig::from_raw(&raw, 1).unwrap();
        assert!(PipelineContext::load(&cfg2).is_err());
        let _ = cfg;
    }
}
