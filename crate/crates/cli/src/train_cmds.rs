//! Training orchestration for the recognizer and the soft decoders:
//! scan a corpus, split it, assemble noisy datasets, train, save.

use std::path::{Path, PathBuf};

use nrldpc_core::bits::BitSegment;
use nrldpc_core::corpus::{split_dataset, CorpusManifest, SegmentLoader};
use nrldpc_core::nn::{train, LossKind, TrainConfig, TrainReport};
use nrldpc_core::nr::training::{denoise_dataset, ftr_dataset};
use nrldpc_core::nr::{
    build_conv_deconv_graph, build_ftr_graph, ftr_classify, FileTypeModel, NeuralSoftDecoder,
};
use nrldpc_core::util::mix64;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct FtrTrainOptions {
    pub corpus: Vec<(String, PathBuf)>,
    pub k: usize,
    pub ber: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub channels_first: usize,
    pub channels_rest: usize,
    pub val_fraction: f64,
    pub seed: u64,
}

pub struct FtrTrainOutcome {
    pub model: FileTypeModel<f64>,
    pub report: TrainReport,
    pub val_accuracy: Option<f64>,
    pub train_segments: usize,
    pub manifest: CorpusManifest,
}

/// Train a file-type recognizer from labeled directory trees.
pub fn train_ftr(opts: &FtrTrainOptions) -> CliResult<FtrTrainOutcome> {
    let registry: Vec<String> = opts.corpus.iter().map(|(l, _)| l.clone()).collect();
    if registry.is_empty() {
        return Err(CliError::usage("no corpus directories given"));
    }
    let manifest = CorpusManifest::scan(&opts.corpus, &registry)?;
    let fractions = [1.0 - opts.val_fraction, opts.val_fraction];
    let splits = split_dataset(&manifest, opts.k, &fractions, mix64(&[opts.seed, 1]))?;
    let mut loader = SegmentLoader::new(&manifest, opts.k);
    let load_all = |loader: &mut SegmentLoader, refs: &[nrldpc_core::corpus::SegmentRef]| {
        refs.iter().map(|r| loader.load(r)).collect::<nrldpc_core::Result<Vec<BitSegment>>>()
    };
    let train_segments = load_all(&mut loader, &splits[0])?;
    let val_segments = load_all(&mut loader, &splits[1])?;
    if train_segments.is_empty() {
        return Err(CliError::data("corpus yields no training segments at this k"));
    }

    let data = ftr_dataset(&train_segments, opts.ber, mix64(&[opts.seed, 2]))?;
    let graph = build_ftr_graph::<f64>(
        opts.k,
        registry.len(),
        opts.channels_first,
        opts.channels_rest,
        mix64(&[opts.seed, 3]),
    )?;
    let mut model = FileTypeModel::new(graph, registry, opts.k, opts.ber)?;
    let cfg = TrainConfig {
        batch_size: opts.batch_size,
        epochs: opts.epochs,
        seed: mix64(&[opts.seed, 4]),
        ..Default::default()
    };
    let report = train(&mut model.graph, &data, LossKind::CrossEntropy, &cfg)?;

    let val_accuracy = if val_segments.is_empty() {
        None
    } else {
        let val_data = ftr_dataset(&val_segments, opts.ber, mix64(&[opts.seed, 5]))?;
        let mut hits = 0usize;
        for ((input, target), seg) in val_data.iter().zip(&val_segments) {
            let noisy = BitSegment::from_bits(
                input.data().iter().map(|&v| (v > 0.5) as u8).collect(),
            )
            .expect("bits");
            let (predicted, _) = ftr_classify(&noisy, &model)?;
            let expected = match target {
                nrldpc_core::nn::Target::Label(l) => *l,
                _ => unreachable!("ftr datasets carry labels"),
            };
            debug_assert_eq!(Some(expected), seg.label());
            hits += usize::from(predicted == expected);
        }
        Some(hits as f64 / val_segments.len() as f64)
    };

    Ok(FtrTrainOutcome {
        model,
        report,
        val_accuracy,
        train_segments: train_segments.len(),
        manifest,
    })
}

#[derive(Debug, Clone)]
pub struct SoftDecTrainOptions {
    pub corpus: PathBuf,
    pub file_type: String,
    pub k: usize,
    pub ber: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub filters: usize,
    pub depth: usize,
    pub seed: u64,
}

pub struct SoftDecTrainOutcome {
    pub decoder: NeuralSoftDecoder,
    pub report: TrainReport,
    pub train_segments: usize,
}

/// Train a conv-deconv soft decoder for one file type.
pub fn train_softdec(opts: &SoftDecTrainOptions) -> CliResult<SoftDecTrainOutcome> {
    let registry = vec![opts.file_type.clone()];
    let roots = vec![(opts.file_type.clone(), opts.corpus.clone())];
    let manifest = CorpusManifest::scan(&roots, &registry)?;
    let splits = split_dataset(&manifest, opts.k, &[1.0], mix64(&[opts.seed, 1]))?;
    let mut loader = SegmentLoader::new(&manifest, opts.k);
    let segments: Vec<BitSegment> = splits[0]
        .iter()
        .map(|r| loader.load(r))
        .collect::<nrldpc_core::Result<_>>()?;
    if segments.is_empty() {
        return Err(CliError::data("corpus yields no segments at this k"));
    }

    let data = denoise_dataset(&segments, opts.ber, mix64(&[opts.seed, 2]))?;
    let mut graph =
        build_conv_deconv_graph::<f64>(opts.k, opts.filters, opts.depth, mix64(&[opts.seed, 3]))?;
    let cfg = TrainConfig {
        batch_size: opts.batch_size,
        epochs: opts.epochs,
        seed: mix64(&[opts.seed, 4]),
        ..Default::default()
    };
    let report = train(&mut graph, &data, LossKind::NegDoublingRate, &cfg)?;
    let decoder = NeuralSoftDecoder::new(graph, &opts.file_type, opts.k, opts.ber)?;
    Ok(SoftDecTrainOutcome { decoder, report, train_segments: segments.len() })
}

/// Write a loss history CSV next to a model path.
pub fn write_loss_history(model_path: &Path, report: &TrainReport) -> CliResult<()> {
    let mut path = model_path.as_os_str().to_owned();
    path.push(".loss.csv");
    std::fs::write(PathBuf::from(path), report.to_csv())?;
    Ok(())
}
