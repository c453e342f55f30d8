//! Systematic (n,k) LDPC codes: alist ingestion, GF(2) linear algebra,
//! encoding and sum-product decoding.
//!
//! Codewords are handled in *storage order*: the k information bits first,
//! then the n-k parity bits. The column permutation that brings the parsed
//! parity-check matrix into that form is computed once at construction and
//! applied transparently.

mod alist;
mod bp;
mod gallager;
pub mod gf2;
mod llr;

pub use alist::{load_alist, load_alist_path, to_alist};
pub use bp::{bp_decode, BpOutcome, DEFAULT_MAX_ITERS};
pub use gallager::generate_regular_code;
pub use llr::LlrVector;

use crate::bits::BitSegment;
use crate::error::{Error, Result};
use gf2::{systematic_form, BitMatrix};

/// A sparse GF(2) parity-check matrix with its systematic form.
#[derive(Debug, Clone)]
pub struct ParityCheckCode {
    n: usize,
    k: usize,
    /// Kept parity checks as sorted lists of original column indices.
    rows: Vec<Vec<usize>>,
    /// Storage position -> original column.
    col_perm: Vec<usize>,
    /// Kept parity checks in storage coordinates (BP/syndrome adjacency).
    checks: Vec<Vec<usize>>,
    /// Per parity bit: the information positions it depends on, from the
    /// row-reduced matrix (the encoder).
    parity_deps: Vec<Vec<usize>>,
    dropped_rows: usize,
    source: String,
}

impl ParityCheckCode {
    /// Build a code from sparse parity-check rows (original column order).
    ///
    /// Dependent rows are dropped to reach full rank; their count is
    /// reported through [`ParityCheckCode::dropped_rows`].
    pub fn from_sparse_rows(n: usize, rows: Vec<Vec<usize>>, source: &str) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("codeword length n must be positive".into()));
        }
        if rows.is_empty() {
            return Err(Error::InvalidParameter("no parity checks given".into()));
        }
        for (j, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::InvalidParameter(format!("parity check {j} is empty")));
            }
            let mut seen = vec![false; n];
            for &c in row {
                if c >= n {
                    return Err(Error::IndexOutOfRange(format!(
                        "column {c} in parity check {j} exceeds n = {n}"
                    )));
                }
                if seen[c] {
                    return Err(Error::Alist(format!(
                        "duplicate column {c} in parity check {j}"
                    )));
                }
                seen[c] = true;
            }
        }

        let h = BitMatrix::from_sparse_rows(&rows, n);
        let sys = systematic_form(&h)?;
        let m = sys.kept.len();
        let k = n - m;

        let mut inv_perm = vec![0usize; n];
        for (pos, &col) in sys.col_perm.iter().enumerate() {
            inv_perm[col] = pos;
        }

        let kept_rows: Vec<Vec<usize>> = sys
            .kept
            .iter()
            .map(|&r| {
                let mut row = rows[r].clone();
                row.sort_unstable();
                row
            })
            .collect();

        let checks: Vec<Vec<usize>> = kept_rows
            .iter()
            .map(|row| {
                let mut c: Vec<usize> = row.iter().map(|&col| inv_perm[col]).collect();
                c.sort_unstable();
                c
            })
            .collect();

        let parity_deps: Vec<Vec<usize>> = (0..m)
            .map(|j| {
                let mut deps: Vec<usize> = sys
                    .reduced
                    .row_support(j)
                    .into_iter()
                    .map(|col| inv_perm[col])
                    .filter(|&pos| pos < k)
                    .collect();
                deps.sort_unstable();
                deps
            })
            .collect();

        Ok(Self {
            n,
            k,
            rows: kept_rows,
            col_perm: sys.col_perm,
            checks,
            parity_deps,
            dropped_rows: sys.dropped.len(),
            source: source.to_string(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of parity checks, n - k.
    pub fn m(&self) -> usize {
        self.n - self.k
    }

    /// Kept parity checks over original column indices.
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Kept parity checks over storage positions.
    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    pub fn col_perm(&self) -> &[usize] {
        &self.col_perm
    }

    /// How many dependent rows were dropped to reach full rank.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Reorder a word from original column order into storage order.
    pub fn permute_to_storage(&self, original: &[u8]) -> Result<Vec<u8>> {
        if original.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: original.len() });
        }
        Ok(self.col_perm.iter().map(|&c| original[c]).collect())
    }

    /// Reorder a word from storage order back into original column order.
    pub fn permute_to_original(&self, storage: &[u8]) -> Result<Vec<u8>> {
        if storage.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: storage.len() });
        }
        let mut out = vec![0u8; self.n];
        for (pos, &col) in self.col_perm.iter().enumerate() {
            out[col] = storage[pos];
        }
        Ok(out)
    }

    /// Systematically encode k information bits into an n-bit codeword
    /// (storage order: information bits first).
    pub fn encode(&self, info: &BitSegment) -> Result<BitSegment> {
        let bits = self.encode_bits(info.bits())?;
        let mut out = BitSegment::from_bits(bits)?;
        if let Some(label) = info.label() {
            out = out.with_label(label);
        }
        Ok(out)
    }

    pub fn encode_bits(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: info.len() });
        }
        let mut word = Vec::with_capacity(self.n);
        word.extend_from_slice(info);
        for deps in &self.parity_deps {
            let mut parity = 0u8;
            for &pos in deps {
                parity ^= info[pos] & 1;
            }
            word.push(parity);
        }
        Ok(word)
    }

    /// Parity syndrome of a storage-order word: entry j is the XOR of the
    /// word bits on check j. All-zero iff the word is a codeword.
    pub fn syndrome(&self, word: &[u8]) -> Result<Vec<u8>> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: word.len() });
        }
        Ok(self
            .checks
            .iter()
            .map(|check| {
                let mut acc = 0u8;
                for &pos in check {
                    acc ^= word[pos] & 1;
                }
                acc
            })
            .collect())
    }

    pub fn is_codeword(&self, word: &[u8]) -> Result<bool> {
        Ok(self.syndrome(word)?.iter().all(|&s| s == 0))
    }
}
