//! Key-value configuration files with command-line overrides.
//!
//! Format: one `key = value` per line, `#` starts a comment. Every key can
//! be overridden on the command line; the effective configuration (after
//! overrides, including the seed) is what gets hashed into the outputs so
//! a replay can prove it ran the same experiment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nrldpc_core::channel::parse_ber;
use nrldpc_core::util::fnv1a64;

use crate::error::{CliError, CliResult};
use crate::pipeline::DecodeMode;

/// Raw configuration: ordered key-value pairs.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "config line {}: expected `key = value`, got {line:?}",
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Apply a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> CliResult<()> {
        let Some((key, value)) = pair.split_once('=') else {
            return Err(CliError::usage(format!("override {pair:?} is not key=value")));
        };
        self.values.insert(key.trim().to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Canonical text form: sorted `key = value` lines.
    pub fn canonical_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Stable hash of the effective configuration.
    pub fn hash_hex(&self) -> String {
        format!("{:016x}", fnv1a64(self.canonical_string().as_bytes()))
    }
}

/// Where benchmark segments come from.
#[derive(Debug, Clone)]
pub enum SourceSpec {
    /// Synthetic Markov-source segments (`markov:<spec>`).
    Markov(String),
    /// Segments cut from a scanned corpus (`corpus:<manifest path>`).
    Corpus(PathBuf),
}

/// A fully validated benchmark configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub code: String,
    pub ber_grid: Vec<f64>,
    pub modes: Vec<DecodeMode>,
    pub trials: usize,
    pub p_dnn: f64,
    pub max_iters: usize,
    pub source: SourceSpec,
    pub registry: Vec<String>,
    pub ftr_model: Option<PathBuf>,
    pub soft_decoders: Vec<(String, PathBuf)>,
    pub force: bool,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub config_hash: String,
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig, seed: u64) -> CliResult<Self> {
        let mut effective = raw.clone();
        effective.set("seed", seed.to_string());

        let code = effective
            .get("code")
            .ok_or_else(|| CliError::usage("missing `code`"))?
            .to_string();

        let ber_grid: Vec<f64> = effective
            .get("ber_grid")
            .ok_or_else(|| CliError::usage("missing `ber_grid`"))?
            .split(',')
            .map(|s| parse_ber(s).map_err(|e| CliError::usage(e.to_string())))
            .collect::<CliResult<_>>()?;
        if ber_grid.is_empty() {
            return Err(CliError::usage("`ber_grid` is empty"));
        }
        if ber_grid.iter().any(|&b| !(b > 0.0 && b < 0.5)) {
            return Err(CliError::usage("every BER must lie strictly inside (0, 0.5)"));
        }

        let modes: Vec<DecodeMode> = effective
            .get("modes")
            .unwrap_or("ldpc-only")
            .split(',')
            .map(|s| s.trim().parse::<DecodeMode>().map_err(CliError::Usage))
            .collect::<CliResult<_>>()?;
        if modes.is_empty() {
            return Err(CliError::usage("`modes` is empty"));
        }

        let trials: usize = effective
            .get("trials")
            .ok_or_else(|| CliError::usage("missing `trials`"))?
            .parse()
            .map_err(|_| CliError::usage("`trials` is not an integer"))?;
        if trials == 0 {
            return Err(CliError::usage("`trials` must be at least 1"));
        }

        let p_dnn = match effective.get("p_dnn") {
            Some(v) => parse_ber(v).map_err(|e| CliError::usage(e.to_string()))?,
            None => 0.012,
        };
        let max_iters: usize = match effective.get("max_iters") {
            Some(v) => v.parse().map_err(|_| CliError::usage("`max_iters` is not an integer"))?,
            None => nrldpc_core::ldpc::DEFAULT_MAX_ITERS,
        };
        if max_iters == 0 {
            return Err(CliError::usage("`max_iters` must be at least 1"));
        }

        let source_str = effective
            .get("source")
            .ok_or_else(|| CliError::usage("missing `source`"))?;
        let source = if let Some(spec) = source_str.strip_prefix("markov:") {
            SourceSpec::Markov(spec.to_string())
        } else if let Some(path) = source_str.strip_prefix("corpus:") {
            SourceSpec::Corpus(PathBuf::from(path))
        } else {
            return Err(CliError::usage(format!(
                "`source` must start with markov: or corpus:, got {source_str:?}"
            )));
        };

        let registry: Vec<String> = match effective.get("registry") {
            Some(v) => v.split(',').map(|s| s.trim().to_string()).collect(),
            None => match &source {
                SourceSpec::Markov(_) => vec!["markov".to_string()],
                SourceSpec::Corpus(_) => {
                    return Err(CliError::usage("corpus sources need a `registry`"))
                }
            },
        };

        let ftr_model = effective.get("ftr_model").map(PathBuf::from);
        let mut soft_decoders = Vec::new();
        for (key, value) in &effective.values {
            if let Some(label) = key.strip_prefix("softdec.") {
                soft_decoders.push((label.to_string(), PathBuf::from(value)));
            }
        }
        let force = matches!(effective.get("force"), Some("true") | Some("1"));
        let out_dir = PathBuf::from(effective.get("out_dir").unwrap_or("bench-out"));

        Ok(Self {
            code,
            ber_grid,
            modes,
            trials,
            p_dnn,
            max_iters,
            source,
            registry,
            ftr_model,
            soft_decoders,
            force,
            seed,
            out_dir,
            config_hash: effective.hash_hex(),
        })
    }
}
