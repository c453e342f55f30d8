//! Channel-probability estimation sweep: for each K, draw a random
//! channel, generate pairs, train the estimator, score it with average KL
//! divergence, and emit a CSV row.

use std::time::Instant;

use nrldpc_core::portfolio::{
    generate_pairs, kl_report, sample_channel, train_estimator_with, EstimatorConfig,
};
use nrldpc_core::util::mix64;

use crate::error::CliResult;

#[derive(Debug, Clone)]
pub struct Table2Options {
    pub k_values: Vec<usize>,
    pub pairs_per_symbol: usize,
    pub passes: usize,
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Table2Row {
    pub k: usize,
    pub n: usize,
    pub delta_k: f64,
    pub wall_seconds: f64,
}

pub fn run_table2(opts: &Table2Options) -> CliResult<Vec<Table2Row>> {
    let mut rows = Vec::with_capacity(opts.k_values.len());
    for &k in &opts.k_values {
        let start = Instant::now();
        let n = k * opts.pairs_per_symbol;
        let channel = sample_channel(k, mix64(&[opts.seed, k as u64, 1]))?;
        let data = generate_pairs(&channel, n, mix64(&[opts.seed, k as u64, 2]))?;
        let mut cfg = EstimatorConfig {
            passes: opts.passes,
            seed: mix64(&[opts.seed, k as u64, 3]),
            ..Default::default()
        };
        cfg.adadelta.epsilon = opts.epsilon;
        let estimate = train_estimator_with(&data, k, &cfg)?;
        let delta_k = kl_report(&channel, &estimate)?;
        rows.push(Table2Row { k, n, delta_k, wall_seconds: start.elapsed().as_secs_f64() });
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[Table2Row]) -> String {
    let mut out = String::from("K,N,delta_K,wall_seconds\n");
    for r in rows {
        out.push_str(&format!("{},{},{:.8},{:.3}\n", r.k, r.n, r.delta_k, r.wall_seconds));
    }
    out
}
