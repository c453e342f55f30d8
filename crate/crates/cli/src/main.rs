//! `nrldpc`: encode, corrupt, decode, train and benchmark.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/model error,
//! 3 non-reproducibility detected in replay mode.

use std::path::PathBuf;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use nrldpc_cli::coderef::load_code;
use nrldpc_cli::config::{ExperimentConfig, RawConfig};
use nrldpc_cli::error::{CliError, CliResult};
use nrldpc_cli::markov_spec::parse_markov_spec;
use nrldpc_cli::pipeline::{decode_segment, run_benchmark, DecodeMode, PipelineContext};
use nrldpc_cli::report::{trials_to_csv, BenchmarkResult};
use nrldpc_cli::table2::{rows_to_csv, run_table2, Table2Options};
use nrldpc_cli::train_cmds::{
    train_ftr, train_softdec, write_loss_history, FtrTrainOptions, SoftDecTrainOptions,
};
use nrldpc_cli::words::{read_words, write_words};

use nrldpc_core::bits::BitSegment;
use nrldpc_core::channel::{bsc_transmit, parse_ber, ChannelSpec};
use nrldpc_core::corpus::segment_file;
use nrldpc_core::nr::{FileTypeModel, MarkovOracleDecoder, NeuralSoftDecoder};

#[derive(Parser)]
#[command(name = "nrldpc", version, about = "Error correction by natural redundancy plus LDPC codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a file into k-bit blocks and encode each into an n-bit
    /// systematic codeword (one word per output line).
    Encode {
        /// Code reference: an alist path or gallager:<n>:<seed>[:wc:wr].
        #[arg(long)]
        code: String,
        /// Input file (raw bytes).
        #[arg(long)]
        input: PathBuf,
        /// Output words file.
        #[arg(long)]
        out: PathBuf,
        /// Also write the k-bit information words here.
        #[arg(long)]
        info_out: Option<PathBuf>,
    },
    /// Flip each bit of every word independently with probability BER.
    Corrupt {
        #[arg(long)]
        input: PathBuf,
        /// BER as a decimal (0.008) or percentage (0.8%).
        #[arg(long)]
        ber: String,
        #[arg(long)]
        seed: u64,
        /// Noise substream of line i is stream_base + i.
        #[arg(long, default_value_t = 0)]
        stream_base: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode noisy codewords back to information words.
    Decode {
        #[arg(long)]
        code: String,
        #[arg(long)]
        input: PathBuf,
        /// ldpc-only, nr-ldpc or oracle-nr-ldpc.
        #[arg(long, default_value = "ldpc-only")]
        mode: String,
        /// Channel BER the words were exposed to.
        #[arg(long)]
        ber: String,
        /// File-type model (nr-ldpc mode).
        #[arg(long)]
        ftr_model: Option<PathBuf>,
        /// Soft decoder per type: TYPE=PATH, repeatable (nr-ldpc mode).
        #[arg(long = "softdec", value_name = "TYPE=PATH")]
        softdec: Vec<String>,
        /// Markov source spec (oracle-nr-ldpc mode).
        #[arg(long)]
        oracle: Option<String>,
        #[arg(long, default_value_t = nrldpc_core::ldpc::DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// Accept models whose metadata does not match the code.
        #[arg(long)]
        force: bool,
        /// Known true information words; when given, the success rate is
        /// printed.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Per-word diagnostics CSV.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Train the file-type recognizer on labeled directories.
    TrainFtr {
        /// label=dir, repeatable.
        #[arg(long = "corpus", value_name = "LABEL=DIR", required = true)]
        corpus: Vec<String>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ber: String,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        #[arg(long, default_value_t = 100)]
        batch_size: usize,
        /// Feature maps: first layer, later layers.
        #[arg(long, default_value = "32,64")]
        channels: String,
        #[arg(long, default_value_t = 0.15)]
        val_fraction: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a conv-deconv soft decoder for one file type.
    TrainSoftdec {
        /// Directory of files of this type.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        file_type: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ber: String,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 25)]
        batch_size: usize,
        #[arg(long, default_value_t = 8)]
        filters: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate random channels for a list of K values and report the
    /// average KL divergence per K as CSV.
    ReproduceTable2 {
        /// Comma-separated K values.
        #[arg(long = "K", default_value = "2,4,10,100,200")]
        k_values: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Pairs per symbol (N = K * this).
        #[arg(long, default_value_t = 5000)]
        n_per_symbol: usize,
        #[arg(long, default_value_t = 3)]
        passes: usize,
        /// AdaDelta epsilon for the estimator.
        #[arg(long, default_value_t = 1e-7)]
        epsilon: f64,
    },
    /// Run the decoding-success-rate benchmark described by a config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Overrides the config's out_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// key=value config overrides, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Compare the produced results.csv byte-for-byte against a
        /// previous run; a mismatch exits with code 3.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Filter a results.json into CSV (and optionally JSON) summaries.
    Report {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated BER filter.
        #[arg(long)]
        ber: Option<String>,
        /// Comma-separated mode filter.
        #[arg(long)]
        mode: Option<String>,
        /// Comma-separated file-type filter.
        #[arg(long)]
        file_type: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let _ = e.print();
            std::process::exit(1);
        }
    };
    if let Err(e) = run(cli.command) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Encode { code, input, out, info_out } => {
            let code = load_code(&code)?;
            let bytes = std::fs::read(&input)
                .map_err(|e| CliError::data(format!("{}: {e}", input.display())))?;
            let segments = segment_file(&bytes, code.k());
            if segments.is_empty() {
                return Err(CliError::data(format!(
                    "{} has fewer than k = {} bits",
                    input.display(),
                    code.k()
                )));
            }
            let codewords: Vec<BitSegment> = segments
                .iter()
                .map(|s| code.encode(s))
                .collect::<nrldpc_core::Result<_>>()?;
            write_words(&out, &codewords)?;
            if let Some(info_path) = info_out {
                write_words(&info_path, &segments)?;
            }
            eprintln!(
                "encoded {} segments of k = {} into n = {} bit codewords",
                codewords.len(),
                code.k(),
                code.n()
            );
            Ok(())
        }
        Command::Corrupt { input, ber, seed, stream_base, out } => {
            let p = parse_ber(&ber).map_err(|e| CliError::usage(e.to_string()))?;
            let words = read_words(&input, None)?;
            let noisy: Vec<BitSegment> = words
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let spec = ChannelSpec::new(p, seed, stream_base + i as u64)
                        .map_err(|e| CliError::usage(e.to_string()))?;
                    Ok(bsc_transmit(w, &spec))
                })
                .collect::<CliResult<_>>()?;
            write_words(&out, &noisy)?;
            eprintln!("corrupted {} words at BER {p}", noisy.len());
            Ok(())
        }
        Command::Decode {
            code,
            input,
            mode,
            ber,
            ftr_model,
            softdec,
            oracle,
            max_iters,
            force,
            truth,
            out,
            diagnostics,
        } => {
            let mode: DecodeMode = mode.parse().map_err(CliError::Usage)?;
            let p = parse_ber(&ber).map_err(|e| CliError::usage(e.to_string()))?;
            let code = load_code(&code)?;
            let k = code.k();
            let mut ctx = PipelineContext::new(code, max_iters, vec!["data".into()]);

            if mode == DecodeMode::NrLdpc {
                let path = ftr_model
                    .ok_or_else(|| CliError::usage("nr-ldpc mode needs --ftr-model"))?;
                let model = FileTypeModel::<f64>::load(&path)?;
                if model.input_len != k && !force {
                    return Err(CliError::data(format!(
                        "file-type model expects {}-bit segments, code k is {k} (use --force to override)",
                        model.input_len
                    )));
                }
                ctx.registry = model.registry.clone();
                for pair in &softdec {
                    let Some((label, path)) = pair.split_once('=') else {
                        return Err(CliError::usage(format!("--softdec {pair:?} is not TYPE=PATH")));
                    };
                    let dec = NeuralSoftDecoder::load(std::path::Path::new(path))?;
                    if (dec.segment_len != k || dec.file_type != label) && !force {
                        return Err(CliError::data(format!(
                            "soft decoder {path} is for {}-bit {} segments (use --force to override)",
                            dec.segment_len, dec.file_type
                        )));
                    }
                    ctx.soft.insert(label.to_string(), Arc::new(dec));
                }
                for label in &ctx.registry {
                    if !ctx.soft.contains_key(label) {
                        return Err(CliError::usage(format!(
                            "missing --softdec {label}=PATH for registry type {label:?}"
                        )));
                    }
                }
                ctx.ftr = Some(model);
            }
            if mode == DecodeMode::OracleNrLdpc {
                let spec = oracle
                    .ok_or_else(|| CliError::usage("oracle-nr-ldpc mode needs --oracle"))?;
                let source = parse_markov_spec(&spec)?;
                ctx.oracle = Some(Arc::new(MarkovOracleDecoder::new(source, k, "markov")));
            }

            let noisy_words = read_words(&input, Some(ctx.code.n()))?;
            let truth_words = match &truth {
                Some(path) => Some(read_words(path, Some(k))?),
                None => None,
            };
            if let Some(t) = &truth_words {
                if t.len() != noisy_words.len() {
                    return Err(CliError::data(format!(
                        "{} truth words for {} inputs",
                        t.len(),
                        noisy_words.len()
                    )));
                }
            }

            let mut decoded = Vec::with_capacity(noisy_words.len());
            let mut diag_csv = String::from("word,converged,iters,ftr_predicted,success\n");
            let mut successes = 0usize;
            for (i, word) in noisy_words.iter().enumerate() {
                let (info, diag) = decode_segment(&ctx, word, mode, p)?;
                let success = truth_words
                    .as_ref()
                    .map(|t| t[i].bits() == info.as_slice());
                if success == Some(true) {
                    successes += 1;
                }
                diag_csv.push_str(&format!(
                    "{i},{},{},{},{}\n",
                    u8::from(diag.converged),
                    diag.iters,
                    diag.ftr_predicted.unwrap_or_default(),
                    success.map(|s| u8::from(s).to_string()).unwrap_or_default()
                ));
                decoded.push(BitSegment::from_bits(info).expect("bits"));
            }
            write_words(&out, &decoded)?;
            if let Some(path) = diagnostics {
                std::fs::write(path, diag_csv)?;
            }
            match &truth_words {
                Some(t) => eprintln!(
                    "decoded {} words, {successes}/{} correct",
                    decoded.len(),
                    t.len()
                ),
                None => eprintln!("decoded {} words", decoded.len()),
            }
            Ok(())
        }
        Command::TrainFtr {
            corpus,
            k,
            ber,
            epochs,
            batch_size,
            channels,
            val_fraction,
            seed,
            out,
        } => {
            let ber = parse_ber(&ber).map_err(|e| CliError::usage(e.to_string()))?;
            let corpus: Vec<(String, PathBuf)> = corpus
                .iter()
                .map(|pair| {
                    pair.split_once('=')
                        .map(|(l, d)| (l.to_string(), PathBuf::from(d)))
                        .ok_or_else(|| {
                            CliError::usage(format!("--corpus {pair:?} is not LABEL=DIR"))
                        })
                })
                .collect::<CliResult<_>>()?;
            let (first, rest) = parse_channels(&channels)?;
            let opts = FtrTrainOptions {
                corpus,
                k,
                ber,
                epochs,
                batch_size,
                channels_first: first,
                channels_rest: rest,
                val_fraction,
                seed,
            };
            let outcome = train_ftr(&opts)?;
            outcome.model.save(&out)?;
            write_loss_history(&out, &outcome.report)?;
            let mut manifest_path = out.as_os_str().to_owned();
            manifest_path.push(".manifest.jsonl");
            outcome.manifest.write_jsonl(&PathBuf::from(manifest_path))?;
            match outcome.val_accuracy {
                Some(acc) => eprintln!(
                    "trained on {} segments, validation accuracy {:.2}%",
                    outcome.train_segments,
                    acc * 100.0
                ),
                None => eprintln!("trained on {} segments", outcome.train_segments),
            }
            Ok(())
        }
        Command::TrainSoftdec {
            corpus,
            file_type,
            k,
            ber,
            epochs,
            batch_size,
            filters,
            depth,
            seed,
            out,
        } => {
            let ber = parse_ber(&ber).map_err(|e| CliError::usage(e.to_string()))?;
            let opts = SoftDecTrainOptions {
                corpus,
                file_type,
                k,
                ber,
                epochs,
                batch_size,
                filters,
                depth,
                seed,
            };
            let outcome = train_softdec(&opts)?;
            outcome.decoder.save(&out)?;
            write_loss_history(&out, &outcome.report)?;
            eprintln!(
                "trained on {} segments, final loss {:.4}",
                outcome.train_segments,
                outcome.report.final_loss().unwrap_or(f64::NAN)
            );
            Ok(())
        }
        Command::ReproduceTable2 { k_values, seed, out, n_per_symbol, passes, epsilon } => {
            let k_values: Vec<usize> = k_values
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| CliError::usage(format!("bad K value {s:?}")))
                })
                .collect::<CliResult<_>>()?;
            if k_values.is_empty() {
                return Err(CliError::usage("no K values"));
            }
            let opts =
                Table2Options { k_values, pairs_per_symbol: n_per_symbol, passes, epsilon, seed };
            let rows = run_table2(&opts)?;
            std::fs::write(&out, rows_to_csv(&rows))?;
            for r in &rows {
                eprintln!(
                    "K = {:>4}: N = {:>8}, average KL divergence {:.6} ({:.1}s)",
                    r.k, r.n, r.delta_k, r.wall_seconds
                );
            }
            Ok(())
        }
        Command::Bench { config, seed, out_dir, overrides, replay } => {
            let mut raw = RawConfig::load(&config)?;
            for pair in &overrides {
                raw.set_pair(pair)?;
            }
            if let Some(dir) = &out_dir {
                raw.set("out_dir", dir.display().to_string());
            }
            let cfg = ExperimentConfig::from_raw(&raw, seed)?;
            let start = std::time::Instant::now();
            let (result, records) = run_benchmark(&cfg)?;
            let wall = start.elapsed().as_secs_f64();

            std::fs::create_dir_all(&cfg.out_dir)?;
            let csv = result.to_csv();
            std::fs::write(cfg.out_dir.join("results.csv"), &csv)?;
            std::fs::write(cfg.out_dir.join("results.json"), result.to_json())?;
            std::fs::write(cfg.out_dir.join("trials.csv"), trials_to_csv(&records))?;
            eprintln!(
                "bench: {} rows, config {}, seed {}, {:.1}s",
                result.rows.len(),
                result.config_hash,
                cfg.seed,
                wall
            );
            for row in &result.rows {
                eprintln!(
                    "  ber {:<8} {:<15} {:<8} rate {:.4} ({} / {} trials)",
                    row.ber, row.mode, row.file_type, row.rate, row.successes, row.trials
                );
            }

            if let Some(previous) = replay {
                let recorded = std::fs::read_to_string(&previous)
                    .map_err(|e| CliError::data(format!("{}: {e}", previous.display())))?;
                if recorded != csv {
                    return Err(CliError::Replay(format!(
                        "results.csv differs from {}",
                        previous.display()
                    )));
                }
                eprintln!("replay verified against {}", previous.display());
            }
            Ok(())
        }
        Command::Report { input, ber, mode, file_type, out, json } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| CliError::data(format!("{}: {e}", input.display())))?;
            let result = BenchmarkResult::from_json(&text)?;
            let bers: Vec<f64> = match ber {
                Some(list) => list
                    .split(',')
                    .map(|s| parse_ber(s).map_err(|e| CliError::usage(e.to_string())))
                    .collect::<CliResult<_>>()?,
                None => Vec::new(),
            };
            let modes: Vec<String> = split_list(mode);
            let types: Vec<String> = split_list(file_type);
            let filtered = result.filtered(&bers, &modes, &types)?;
            std::fs::write(&out, filtered.to_csv())?;
            if let Some(path) = json {
                std::fs::write(path, filtered.to_json())?;
            }
            eprintln!("report: {} rows", filtered.rows.len());
            Ok(())
        }
    }
}

fn split_list(value: Option<String>) -> Vec<String> {
    value
        .map(|v| v.split(',').map(|s| s.trim().to_string()).collect())
        .unwrap_or_default()
}

fn parse_channels(spec: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::usage(format!(
            "--channels must be FIRST,REST, got {spec:?}"
        )));
    }
    let first = parts[0].trim().parse().map_err(|_| CliError::usage("bad channel count"))?;
    let rest = parts[1].trim().parse().map_err(|_| CliError::usage("bad channel count"))?;
    Ok((first, rest))
}
