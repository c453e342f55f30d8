//! Flooding-schedule sum-product decoding in the LLR domain.

use crate::bits::BitSegment;
use crate::error::{Error, Result};
use crate::ldpc::{LlrVector, ParityCheckCode};
use crate::num::{clamp_llr, r, Real};

/// Default iteration budget when the caller has no opinion.
pub const DEFAULT_MAX_ITERS: usize = 50;

/// Outcome of a belief-propagation run.
#[derive(Debug, Clone)]
pub struct BpOutcome {
    /// Decoded word, storage order (information bits first).
    pub word: BitSegment,
    /// True iff decoding exited on an all-zero syndrome.
    pub converged: bool,
    /// Message-update iterations performed. Zero when the hard decision on
    /// the initial LLRs was already a codeword.
    pub iters_used: usize,
}

impl BpOutcome {
    /// The k information bits of the decoded word.
    pub fn info_bits(&self, code: &ParityCheckCode) -> Vec<u8> {
        self.word.bits()[..code.k()].to_vec()
    }
}

/// Sum-product decoding with the tanh rule and a flooding schedule.
///
/// The hard decision on the initial LLRs is checked before the first
/// message update; messages are clamped to the global LLR cap throughout.
/// Non-convergence is reported through [`BpOutcome::converged`], never as
/// an error.
pub fn bp_decode<R: Real>(
    init: &LlrVector<R>,
    code: &ParityCheckCode,
    max_iters: usize,
) -> Result<BpOutcome> {
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    if init.len() != code.n() {
        return Err(Error::LengthMismatch { expected: code.n(), got: init.len() });
    }
    let llr = init.values();
    let checks = code.checks();
    let n = code.n();

    // Edge layout: edges are numbered check-major, in check order.
    let mut edge_start = Vec::with_capacity(checks.len() + 1);
    edge_start.push(0usize);
    for check in checks {
        edge_start.push(edge_start.last().unwrap() + check.len());
    }
    let num_edges = *edge_start.last().unwrap();
    let mut edge_var = Vec::with_capacity(num_edges);
    for check in checks {
        edge_var.extend_from_slice(check);
    }
    let mut var_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &v) in edge_var.iter().enumerate() {
        var_edges[v].push(e);
    }

    let decide = |totals: &[R]| -> Vec<u8> {
        totals.iter().map(|&t| if t > R::zero() { 0 } else { 1 }).collect()
    };
    let is_codeword = |bits: &[u8]| -> bool {
        checks.iter().all(|check| check.iter().fold(0u8, |acc, &v| acc ^ bits[v]) == 0)
    };

    // Decision before the first update.
    let initial_bits = decide(llr);
    if is_codeword(&initial_bits) {
        return Ok(BpOutcome { word: BitSegment::from_bits(initial_bits)?, converged: true, iters_used: 0 });
    }

    let mut v2c: Vec<R> = edge_var.iter().map(|&v| llr[v]).collect();
    let mut c2v: Vec<R> = vec![R::zero(); num_edges];
    let half = r::<R>(0.5);
    let two = r::<R>(2.0);

    let mut last_bits = initial_bits;
    for iter in 1..=max_iters {
        // Check node update via the tanh rule, stabilized with
        // prefix/suffix products so no division is needed.
        for (c, check) in checks.iter().enumerate() {
            let base = edge_start[c];
            let deg = check.len();
            let tanhs: Vec<R> = (0..deg).map(|i| (v2c[base + i] * half).tanh()).collect();
            let mut prefix = vec![R::one(); deg + 1];
            for i in 0..deg {
                prefix[i + 1] = prefix[i] * tanhs[i];
            }
            let mut suffix = R::one();
            for i in (0..deg).rev() {
                let prod = prefix[i] * suffix;
                c2v[base + i] = clamp_llr(two * prod.atanh());
                suffix *= tanhs[i];
            }
        }

        // Variable node update: total minus the incoming edge.
        let mut totals: Vec<R> = llr.to_vec();
        for v in 0..n {
            for &e in &var_edges[v] {
                totals[v] += c2v[e];
            }
        }
        for v in 0..n {
            for &e in &var_edges[v] {
                v2c[e] = clamp_llr(totals[v] - c2v[e]);
            }
        }

        last_bits = decide(&totals);
        if is_codeword(&last_bits) {
            return Ok(BpOutcome { word: BitSegment::from_bits(last_bits)?, converged: true, iters_used: iter });
        }
    }

    Ok(BpOutcome { word: BitSegment::from_bits(last_bits)?, converged: false, iters_used: max_iters })
}
