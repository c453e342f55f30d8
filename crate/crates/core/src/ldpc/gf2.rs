//! Dense GF(2) matrices and the systematic-form reduction.

use crate::error::{Error, Result};

/// Row-major bit matrix packed into 64-bit words.
#[derive(Debug, Clone)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64).max(1);
        Self { rows, cols, words_per_row, data: vec![0; rows * words_per_row] }
    }

    pub fn from_sparse_rows(rows: &[Vec<usize>], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            for &c in row {
                m.set(r, c, true);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        let w = self.data[r * self.words_per_row + c / 64];
        (w >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let idx = r * self.words_per_row + c / 64;
        let mask = 1u64 << (c % 64);
        if value {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    /// dst ^= src, whole rows.
    pub fn xor_row_into(&mut self, dst: usize, src: usize) {
        let (a, b) = (dst * self.words_per_row, src * self.words_per_row);
        for w in 0..self.words_per_row {
            let v = self.data[b + w];
            self.data[a + w] ^= v;
        }
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        let base = r * self.words_per_row;
        self.data[base..base + self.words_per_row].iter().all(|&w| w == 0)
    }

    /// Column indices of the ones in row `r`, ascending.
    pub fn row_support(&self, r: usize) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.get(r, c)).collect()
    }

    /// Multiply by a column bit vector over GF(2).
    pub fn mul_vec(&self, v: &[u8]) -> Result<Vec<u8>> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows)
            .map(|r| {
                let mut acc = 0u8;
                for (c, bit) in v.iter().enumerate() {
                    if self.get(r, c) {
                        acc ^= bit & 1;
                    }
                }
                acc
            })
            .collect())
    }
}

/// Result of Gauss-Jordan elimination with column pivoting.
///
/// `col_perm` maps storage position to original column; applying it to the
/// columns of the reduced matrix yields `[P | I]` with the identity on the
/// last `kept.len()` positions. Rows that reduced to zero are dependent and
/// listed in `dropped`.
#[derive(Debug, Clone)]
pub struct SystematicForm {
    pub col_perm: Vec<usize>,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    pub reduced: BitMatrix,
    pub pivot_cols: Vec<usize>,
}

/// Bring a parity-check matrix into systematic form.
///
/// Pivots are searched from the highest column index downwards so that
/// matrices whose right side already is an identity (the usual convention
/// for systematic codes) keep their column order, leaving information bits
/// first.
pub fn systematic_form(h: &BitMatrix) -> Result<SystematicForm> {
    let mut reduced = h.clone();
    let (m, n) = (h.rows(), h.cols());
    let mut used = vec![false; n];
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; m];

    for (r, pivot_slot) in pivot_of_row.iter_mut().enumerate() {
        let pivot = (0..n).rev().find(|&c| !used[c] && reduced.get(r, c));
        let Some(c) = pivot else {
            continue; // dependent row
        };
        used[c] = true;
        *pivot_slot = Some(c);
        for other in 0..m {
            if other != r && reduced.get(other, c) {
                reduced.xor_row_into(other, r);
            }
        }
    }

    let kept: Vec<usize> = (0..m).filter(|&r| pivot_of_row[r].is_some()).collect();
    let dropped: Vec<usize> = (0..m).filter(|&r| pivot_of_row[r].is_none()).collect();
    if kept.is_empty() {
        return Err(Error::RankDeficient("matrix has rank zero".into()));
    }
    debug_assert!(dropped.iter().all(|&r| reduced.row_is_zero(r)));

    let pivot_cols: Vec<usize> = kept.iter().map(|&r| pivot_of_row[r].unwrap()).collect();
    let mut col_perm: Vec<usize> = (0..n).filter(|&c| !used[c]).collect();
    col_perm.extend_from_slice(&pivot_cols);

    // Re-pack the reduced matrix in kept-row order.
    let mut packed = BitMatrix::zeros(kept.len(), n);
    for (new_r, &old_r) in kept.iter().enumerate() {
        for c in reduced.row_support(old_r) {
            packed.set(new_r, c, true);
        }
    }

    Ok(SystematicForm { col_perm, kept, dropped, reduced: packed, pivot_cols })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_h() -> BitMatrix {
        // H = [[1,1,0,1,0,0],[0,1,1,0,1,0],[1,0,1,0,0,1]]
        BitMatrix::from_sparse_rows(&[vec![0, 1, 3], vec![1, 2, 4], vec![0, 2, 5]], 6)
    }

    #[test]
    fn identity_block_lands_on_last_columns() {
        let sys = systematic_form(&example_h()).unwrap();
        assert_eq!(sys.dropped.len(), 0);
        assert_eq!(sys.kept.len(), 3);
        // The right side of H already is an identity, so the permutation is
        // the identity map.
        assert_eq!(sys.col_perm, vec![0, 1, 2, 3, 4, 5]);
        // Permuted reduced matrix ends in I_3.
        let m = sys.kept.len();
        let k = 6 - m;
        for j in 0..m {
            for i in 0..m {
                let c = sys.col_perm[k + i];
                assert_eq!(sys.reduced.get(j, c), i == j);
            }
        }
    }

    #[test]
    fn dependent_rows_are_dropped() {
        // Third row = row0 xor row1.
        let h = BitMatrix::from_sparse_rows(
            &[vec![0, 1, 3], vec![1, 2, 4], vec![0, 2, 3, 4]],
            6,
        );
        let sys = systematic_form(&h).unwrap();
        assert_eq!(sys.kept.len(), 2);
        assert_eq!(sys.dropped, vec![2]);
    }

    #[test]
    fn zero_rank_is_an_error() {
        let h = BitMatrix::zeros(2, 4);
        assert!(systematic_form(&h).is_err());
    }

    #[test]
    fn mul_vec_matches_definition() {
        let h = example_h();
        let s = h.mul_vec(&[1, 0, 1, 1, 1, 0]).unwrap();
        assert_eq!(s, vec![0, 0, 0]);
        let s = h.mul_vec(&[1, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(s, vec![1, 0, 1]); // column 0 of H
    }
}
