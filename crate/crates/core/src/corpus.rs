//! Corpus ingestion: scan labeled file trees, cut deterministic k-bit
//! segments, and split them for training without leakage.
//!
//! Bytes are expanded to a contiguous MSB-first bitstream and cut into
//! consecutive non-overlapping k-bit windows; a partial tail is dropped.
//! Splits are decided at file granularity so segments of one file never
//! straddle splits. Noise is never stored here; error patterns are applied
//! on the fly by the channel when datasets are assembled.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bits::{bytes_to_bits_msb, BitSegment, SegmentOrigin};
use crate::error::{Error, Result};
use crate::util::{domain, fnv1a64, keyed_rng, mix64, shuffle};

/// One scanned file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: String,
    pub bytes: u64,
    pub hash: String,
}

/// The scanned corpus: entries in deterministic order plus the type
/// registry they are labeled against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
    pub registry: Vec<String>,
}

/// Reference to one segment of one manifest entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentRef {
    pub file_idx: usize,
    pub seg_idx: usize,
}

impl CorpusManifest {
    /// Scan per-type root directories. Files are labeled by the root they
    /// live under; ordering is lexicographic by path, so re-scanning an
    /// unchanged tree gives an identical manifest.
    pub fn scan(roots: &[(String, PathBuf)], registry: &[String]) -> Result<Self> {
        for (label, _) in roots {
            if !registry.iter().any(|r| r == label) {
                return Err(Error::Corpus(format!("label {label:?} not in the registry")));
            }
        }
        let mut entries = Vec::new();
        for (label, root) in roots {
            let mut files = Vec::new();
            collect_files(root, &mut files)
                .map_err(|e| Error::Corpus(format!("{}: {e}", root.display())))?;
            for path in files {
                let data = std::fs::read(&path)
                    .map_err(|e| Error::Corpus(format!("{}: {e}", path.display())))?;
                entries.push(ManifestEntry {
                    path: path.display().to_string(),
                    label: label.clone(),
                    bytes: data.len() as u64,
                    hash: format!("{:016x}", fnv1a64(&data)),
                });
            }
        }
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(Self { entries, registry: registry.to_vec() })
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.registry.iter().position(|r| r == label)
    }

    /// Number of k-bit segments each entry yields: floor(8*bytes / k).
    pub fn segment_counts(&self, k: usize) -> Vec<usize> {
        self.entries.iter().map(|e| (e.bytes as usize * 8) / k).collect()
    }

    /// Line-oriented JSON, one entry per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str, registry: &[String]) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ManifestEntry = serde_json::from_str(line)
                .map_err(|e| Error::Corpus(format!("manifest line {}: {e}", lineno + 1)))?;
            if !registry.iter().any(|r| r == &entry.label) {
                return Err(Error::Corpus(format!(
                    "manifest line {}: label {:?} not in the registry",
                    lineno + 1,
                    entry.label
                )));
            }
            entries.push(entry);
        }
        Ok(Self { entries, registry: registry.to_vec() })
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn read_jsonl(path: &Path, registry: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Corpus(format!("{}: {e}", path.display())))?;
        Self::from_jsonl(&text, registry)
    }

    /// Stable fingerprint of the manifest contents.
    pub fn manifest_hash(&self) -> u64 {
        fnv1a64(self.to_jsonl().as_bytes())
    }
}

fn collect_files(root: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(root)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// Cut a byte buffer into consecutive k-bit segments, MSB-first, dropping
/// the partial tail.
pub fn segment_bytes(bytes: &[u8], k: usize) -> Vec<Vec<u8>> {
    if k == 0 {
        return Vec::new();
    }
    let bits = bytes_to_bits_msb(bytes);
    bits.chunks_exact(k).map(<[u8]>::to_vec).collect()
}

/// Segment a whole file's bytes into labeled [`BitSegment`]s.
pub fn segment_file(bytes: &[u8], k: usize) -> Vec<BitSegment> {
    segment_bytes(bytes, k)
        .into_iter()
        .enumerate()
        .map(|(i, bits)| {
            BitSegment::from_bits(bits)
                .expect("segment bits are 0/1")
                .with_origin(SegmentOrigin { file: String::new(), offset_bits: (i * k) as u64 })
        })
        .collect()
}

/// Assign segments to splits by seeded shuffle at file granularity.
/// `fractions` must be nonnegative and sum to 1; per type, the number of
/// files given to each split is within one file of the fractional target.
pub fn split_dataset(
    manifest: &CorpusManifest,
    k: usize,
    fractions: &[f64],
    seed: u64,
) -> Result<Vec<Vec<SegmentRef>>> {
    if fractions.is_empty() {
        return Err(Error::InvalidParameter("no split fractions given".into()));
    }
    if fractions.iter().any(|&f| f < 0.0) {
        return Err(Error::InvalidParameter("split fractions must be nonnegative".into()));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("split fractions sum to {total}, not 1")));
    }
    let counts = manifest.segment_counts(k);
    let mut by_label: HashMap<&str, Vec<usize>> = HashMap::new();
    for (idx, entry) in manifest.entries.iter().enumerate() {
        by_label.entry(entry.label.as_str()).or_default().push(idx);
    }

    let mut splits: Vec<Vec<SegmentRef>> = vec![Vec::new(); fractions.len()];
    // Iterate labels in registry order for determinism.
    for (label_idx, label) in manifest.registry.iter().enumerate() {
        let Some(files) = by_label.get(label.as_str()) else {
            continue;
        };
        let mut files = files.clone();
        let mut rng = keyed_rng(seed, label_idx as u64, domain::SHUFFLE);
        shuffle(&mut files, &mut rng);

        // Largest-remainder allocation of file counts per split.
        let n = files.len();
        let mut alloc: Vec<usize> = fractions.iter().map(|f| (f * n as f64).floor() as usize).collect();
        let mut remainders: Vec<(usize, f64)> = fractions
            .iter()
            .enumerate()
            .map(|(i, f)| (i, f * n as f64 - alloc[i] as f64))
            .collect();
        remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let mut short = n - alloc.iter().sum::<usize>();
        for &(i, _) in &remainders {
            if short == 0 {
                break;
            }
            alloc[i] += 1;
            short -= 1;
        }
        for (i, &f) in fractions.iter().enumerate() {
            if f > 0.0 && alloc[i] == 0 {
                return Err(Error::Corpus(format!(
                    "too few {label:?} files ({n}) to populate every split"
                )));
            }
        }

        let mut cursor = 0usize;
        for (split, &count) in alloc.iter().enumerate() {
            for &file_idx in &files[cursor..cursor + count] {
                for seg_idx in 0..counts[file_idx] {
                    splits[split].push(SegmentRef { file_idx, seg_idx });
                }
            }
            cursor += count;
        }
    }
    Ok(splits)
}

/// Loads segments referenced by a manifest, caching file contents.
pub struct SegmentLoader<'a> {
    manifest: &'a CorpusManifest,
    k: usize,
    cache: HashMap<usize, Vec<u8>>,
}

impl<'a> SegmentLoader<'a> {
    pub fn new(manifest: &'a CorpusManifest, k: usize) -> Self {
        Self { manifest, k, cache: HashMap::new() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn load(&mut self, seg: &SegmentRef) -> Result<BitSegment> {
        let entry = self
            .manifest
            .entries
            .get(seg.file_idx)
            .ok_or_else(|| Error::Corpus(format!("file index {} out of range", seg.file_idx)))?;
        if let std::collections::hash_map::Entry::Vacant(slot) = self.cache.entry(seg.file_idx) {
            let data = std::fs::read(&entry.path)
                .map_err(|e| Error::Corpus(format!("{}: {e}", entry.path)))?;
            slot.insert(data);
        }
        let bytes = &self.cache[&seg.file_idx];
        let start = seg.seg_idx * self.k;
        let bits = bytes_to_bits_msb(bytes);
        if start + self.k > bits.len() {
            return Err(Error::Corpus(format!(
                "segment {} out of range for {}",
                seg.seg_idx, entry.path
            )));
        }
        let label = self
            .manifest
            .label_index(&entry.label)
            .ok_or_else(|| Error::Corpus(format!("label {:?} not in registry", entry.label)))?;
        Ok(BitSegment::from_bits(bits[start..start + self.k].to_vec())?
            .with_label(label)
            .with_origin(SegmentOrigin { file: entry.path.clone(), offset_bits: start as u64 }))
    }
}

/// Synthetic corpora with controllable byte statistics, for desk-scale
/// experiments and tests.
pub mod synth {
    use super::*;
    use rand::RngExt;

    /// Byte-level generative models with visibly different statistics.
    #[derive(Debug, Clone)]
    pub enum ByteModel {
        /// Uniform over a fixed alphabet.
        Alphabet(Vec<u8>),
        /// Word-like text: letter runs with spaces and newlines.
        Text,
        /// Tag-structured text: nested ASCII markup.
        Markup,
        /// High-entropy bytes.
        Uniform,
        /// A periodic scaffold with occasional noise bytes.
        Periodic { period: Vec<u8> },
        /// Bytes packed MSB-first from an order-m Markov bit stream, so
        /// cut segments carry exactly that bit-level redundancy.
        MarkovBits { order: usize, transitions: Vec<f64> },
    }

    impl ByteModel {
        pub fn generate(&self, len: usize, seed: u64, stream: u64) -> Vec<u8> {
            let mut rng = keyed_rng(seed, stream, domain::CORPUS);
            let mut out = Vec::with_capacity(len);
            match self {
                ByteModel::Alphabet(set) => {
                    for _ in 0..len {
                        out.push(set[rng.random_range(0..set.len())]);
                    }
                }
                ByteModel::Text => {
                    while out.len() < len {
                        let word_len = rng.random_range(2..9);
                        for _ in 0..word_len {
                            out.push(b'a' + rng.random_range(0..26) as u8);
                        }
                        out.push(if rng.random::<f64>() < 0.1 { b'\n' } else { b' ' });
                    }
                    out.truncate(len);
                }
                ByteModel::Markup => {
                    let tags: [&[u8]; 4] = [b"<div>", b"</div>", b"<p id=\"x\">", b"</p>"];
                    while out.len() < len {
                        out.extend_from_slice(tags[rng.random_range(0..tags.len())]);
                        let text_len = rng.random_range(1..6);
                        for _ in 0..text_len {
                            out.push(b'A' + rng.random_range(0..26) as u8);
                        }
                    }
                    out.truncate(len);
                }
                ByteModel::Uniform => {
                    for _ in 0..len {
                        out.push(rng.random::<u8>());
                    }
                }
                ByteModel::Periodic { period } => {
                    while out.len() < len {
                        out.extend_from_slice(period);
                        if rng.random::<f64>() < 0.05 {
                            out.push(rng.random::<u8>());
                        }
                    }
                    out.truncate(len);
                }
                ByteModel::MarkovBits { order, transitions } => {
                    let source = crate::nr::MarkovSource::with_uniform_initial(
                        *order,
                        transitions.clone(),
                    )
                    .expect("valid markov byte model");
                    let bits = source.sample(len * 8, &mut rng);
                    out = crate::bits::bits_to_bytes_msb(&bits);
                }
            }
            out
        }
    }

    /// Write one directory per (label, model) under `root`, with
    /// `files_per_type` files of `bytes_per_file` bytes each. Returns the
    /// (label, directory) pairs in the given order.
    pub fn write_synthetic_corpus(
        root: &Path,
        types: &[(String, ByteModel)],
        files_per_type: usize,
        bytes_per_file: usize,
        seed: u64,
    ) -> Result<Vec<(String, PathBuf)>> {
        let mut roots = Vec::with_capacity(types.len());
        for (ti, (label, model)) in types.iter().enumerate() {
            let dir = root.join(label);
            std::fs::create_dir_all(&dir)?;
            for f in 0..files_per_type {
                let stream = mix64(&[ti as u64, f as u64]);
                let data = model.generate(bytes_per_file, seed, stream);
                std::fs::write(dir.join(format!("{label}_{f:04}.dat")), data)?;
            }
            roots.push((label.clone(), dir));
        }
        Ok(roots)
    }
}
