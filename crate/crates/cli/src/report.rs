//! Benchmark result aggregation and its CSV/JSON artifacts.
//!
//! The CSV and JSON outputs are byte-deterministic given (config, seed):
//! wall-clock time is kept out of them and only reported on stderr.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::pipeline::DecodeMode;

/// One decoded trial, as logged per line in `trials.csv`.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub ber: f64,
    pub mode: DecodeMode,
    pub trial: u64,
    pub noise_stream: u64,
    pub file_type: String,
    pub success: bool,
    pub converged: bool,
    pub iters: usize,
    pub ftr_predicted: Option<String>,
}

/// Aggregated counts for one (BER, mode, file type) cell.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BenchRow {
    pub ber: f64,
    pub mode: String,
    pub file_type: String,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub ftr_accuracy: Option<f64>,
    pub mean_iters: f64,
}

/// Everything a replay needs: rows plus the config hash and seed.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BenchmarkResult {
    pub config_hash: String,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
}

impl BenchmarkResult {
    /// Aggregate per-trial records into rows ordered by
    /// (BER, mode, file type).
    pub fn from_records(records: &[TrialRecord], config_hash: &str, seed: u64) -> Self {
        use std::collections::BTreeMap;
        #[derive(Default)]
        struct Cell {
            trials: u64,
            successes: u64,
            iters: u64,
            ftr_hits: u64,
            ftr_total: u64,
        }
        let mut cells: BTreeMap<(String, String, String), Cell> = BTreeMap::new();
        for r in records {
            let key = (format!("{:.10}", r.ber), r.mode.to_string(), r.file_type.clone());
            let cell = cells.entry(key).or_default();
            cell.trials += 1;
            cell.successes += u64::from(r.success);
            cell.iters += r.iters as u64;
            if let Some(predicted) = &r.ftr_predicted {
                cell.ftr_total += 1;
                cell.ftr_hits += u64::from(predicted == &r.file_type);
            }
        }
        let rows = cells
            .into_iter()
            .map(|((ber, mode, file_type), c)| BenchRow {
                ber: ber.parse().expect("formatted from f64"),
                mode,
                file_type,
                trials: c.trials,
                successes: c.successes,
                rate: c.successes as f64 / c.trials as f64,
                ftr_accuracy: (c.ftr_total > 0).then(|| c.ftr_hits as f64 / c.ftr_total as f64),
                mean_iters: c.iters as f64 / c.trials as f64,
            })
            .collect();
        Self { config_hash: config_hash.to_string(), seed, rows }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ber,mode,file_type,trials,successes,rate,ftr_accuracy,mean_iters\n");
        for r in &self.rows {
            let ftr = r.ftr_accuracy.map(|a| format!("{a:.6}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{:.6},{},{:.4}\n",
                r.ber, r.mode, r.file_type, r.trials, r.successes, r.rate, ftr, r.mean_iters
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("result serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::data(format!("results JSON: {e}")))
    }

    /// Keep only rows matching the given filters (any filter may be empty
    /// = no constraint). Errors when nothing remains.
    pub fn filtered(
        &self,
        bers: &[f64],
        modes: &[String],
        file_types: &[String],
    ) -> CliResult<Self> {
        let rows: Vec<BenchRow> = self
            .rows
            .iter()
            .filter(|r| bers.is_empty() || bers.iter().any(|b| (b - r.ber).abs() < 1e-12))
            .filter(|r| modes.is_empty() || modes.contains(&r.mode))
            .filter(|r| file_types.is_empty() || file_types.contains(&r.file_type))
            .cloned()
            .collect();
        if rows.is_empty() {
            return Err(CliError::data("no rows match the requested filters"));
        }
        Ok(Self { config_hash: self.config_hash.clone(), seed: self.seed, rows })
    }
}

/// Per-trial log as CSV.
pub fn trials_to_csv(records: &[TrialRecord]) -> String {
    let mut out =
        String::from("ber,mode,trial,noise_stream,file_type,success,converged,iters,ftr_predicted\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.ber,
            r.mode,
            r.trial,
            r.noise_stream,
            r.file_type,
            u8::from(r.success),
            u8::from(r.converged),
            r.iters,
            r.ftr_predicted.clone().unwrap_or_default()
        ));
    }
    out
}
