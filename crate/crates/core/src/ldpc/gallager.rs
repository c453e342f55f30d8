//! Seeded generator for regular LDPC parity-check matrices, used for
//! desk-scale experiments so nothing depends on downloading published code
//! files.

use rand::RngExt;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::ldpc::ParityCheckCode;
use crate::util::{domain, keyed_rng, shuffle};

/// Generate a regular (col_weight, row_weight) parity-check code of length
/// `n` by random edge matching: every column gets exactly `col_weight`
/// distinct rows and every row exactly `row_weight` columns. Length-4
/// cycles (two columns sharing two rows) are then removed by edge swaps
/// where possible within a bounded budget. Deterministic for a given seed.
///
/// Dependent rows are dropped during systematic preprocessing, so the
/// resulting k can be slightly above `n - n*col_weight/row_weight`.
pub fn generate_regular_code(
    n: usize,
    col_weight: usize,
    row_weight: usize,
    seed: u64,
) -> Result<ParityCheckCode> {
    if n == 0 || col_weight == 0 || row_weight == 0 {
        return Err(Error::InvalidParameter("n and weights must be positive".into()));
    }
    if !(n * col_weight).is_multiple_of(row_weight) {
        return Err(Error::InvalidParameter(format!(
            "n*col_weight = {} is not divisible by row_weight = {row_weight}",
            n * col_weight
        )));
    }
    let m = n * col_weight / row_weight;
    if col_weight > m {
        return Err(Error::InvalidParameter(format!(
            "column weight {col_weight} exceeds row count {m}"
        )));
    }

    let mut rng = keyed_rng(seed, 0, domain::INIT);

    // Perfect matching of edge stubs: each row appears row_weight times,
    // consecutive chunks of col_weight stubs form the columns.
    let mut stubs: Vec<usize> =
        (0..m).flat_map(|r| std::iter::repeat_n(r, row_weight)).collect();
    shuffle(&mut stubs, &mut rng);
    let mut cols: Vec<Vec<usize>> = stubs.chunks(col_weight).map(<[usize]>::to_vec).collect();

    remove_duplicate_rows(&mut cols, &mut rng, 1000 * n)?;
    remove_short_cycles(&mut cols, &mut rng, 50 * n);

    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (c, col) in cols.iter().enumerate() {
        for &r in col {
            rows[r].push(c);
        }
    }
    rows.retain(|row| !row.is_empty());

    ParityCheckCode::from_sparse_rows(
        n,
        rows,
        &format!("gallager:{n}:{col_weight}:{row_weight}:{seed}"),
    )
}

fn has_duplicate(col: &[usize]) -> bool {
    for i in 0..col.len() {
        for j in i + 1..col.len() {
            if col[i] == col[j] {
                return true;
            }
        }
    }
    false
}

/// Swap stubs between columns until no column touches the same row twice.
fn remove_duplicate_rows(
    cols: &mut [Vec<usize>],
    rng: &mut ChaCha12Rng,
    budget: usize,
) -> Result<()> {
    let n = cols.len();
    let wc = cols[0].len();
    for _ in 0..budget {
        let Some(c) = cols.iter().position(|col| has_duplicate(col)) else {
            return Ok(());
        };
        let i = rng.random_range(0..wc);
        let c2 = rng.random_range(0..n);
        let i2 = rng.random_range(0..wc);
        if c2 == c {
            continue;
        }
        let (a, b) = (cols[c][i], cols[c2][i2]);
        // The swap must not re-introduce a duplicate in either column.
        if cols[c].contains(&b) || cols[c2].contains(&a) {
            continue;
        }
        cols[c][i] = b;
        cols[c2][i2] = a;
    }
    Err(Error::InvalidParameter(
        "could not remove duplicate rows within the swap budget".into(),
    ))
}

fn column_pairs(col: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..col.len() {
        for j in i + 1..col.len() {
            out.push((col[i].min(col[j]), col[i].max(col[j])));
        }
    }
    out
}

fn pair_counts(cols: &[Vec<usize>]) -> std::collections::HashMap<(usize, usize), usize> {
    let mut counts = std::collections::HashMap::new();
    for col in cols {
        for p in column_pairs(col) {
            *counts.entry(p).or_insert(0usize) += 1;
        }
    }
    counts
}

/// Total number of row-pair repeats across columns; zero means girth > 4.
fn excess_pairs(cols: &[Vec<usize>]) -> usize {
    pair_counts(cols).values().map(|&c| c.saturating_sub(1)).sum()
}

/// Best-effort removal of 4-cycles by random stub swaps that strictly
/// reduce the number of repeated row pairs.
fn remove_short_cycles(cols: &mut [Vec<usize>], rng: &mut ChaCha12Rng, budget: usize) {
    let n = cols.len();
    let wc = cols[0].len();
    let mut excess = excess_pairs(cols);
    for _ in 0..budget {
        if excess == 0 {
            return;
        }
        let counts = pair_counts(cols);
        let Some(c) = cols
            .iter()
            .position(|col| column_pairs(col).iter().any(|p| counts[p] > 1))
        else {
            return;
        };
        let i = rng.random_range(0..wc);
        let c2 = rng.random_range(0..n);
        let i2 = rng.random_range(0..wc);
        if c2 == c {
            continue;
        }
        let (a, b) = (cols[c][i], cols[c2][i2]);
        if cols[c].contains(&b) || cols[c2].contains(&a) {
            continue;
        }
        cols[c][i] = b;
        cols[c2][i2] = a;
        let new_excess = excess_pairs(cols);
        if new_excess < excess {
            excess = new_excess;
        } else {
            cols[c][i] = a;
            cols[c2][i2] = b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::to_alist;

    #[test]
    fn construction_is_deterministic() {
        let a = generate_regular_code(48, 3, 6, 7).unwrap();
        let b = generate_regular_code(48, 3, 6, 7).unwrap();
        assert_eq!(to_alist(&a), to_alist(&b));
        let c = generate_regular_code(48, 3, 6, 8).unwrap();
        assert_ne!(to_alist(&a), to_alist(&c));
    }

    #[test]
    fn degrees_match_the_request() {
        let code = generate_regular_code(96, 3, 6, 21).unwrap();
        let mut col_deg = vec![0usize; code.n()];
        for row in code.rows() {
            assert!(row.len() <= 6);
            for &c in row {
                col_deg[c] += 1;
            }
        }
        // Dropped dependent rows can reduce a few column degrees.
        assert!(col_deg.iter().all(|&d| d <= 3));
        assert!(col_deg.iter().filter(|&&d| d == 3).count() >= code.n() * 9 / 10);
    }

    #[test]
    fn desk_scale_code_avoids_4_cycles() {
        let code = generate_regular_code(1024, 3, 6, 2024).unwrap();
        let mut columns: Vec<Vec<usize>> = vec![Vec::new(); code.n()];
        for (j, row) in code.rows().iter().enumerate() {
            for &c in row {
                columns[c].push(j);
            }
        }
        assert_eq!(excess_pairs(&columns), 0, "4-cycles present in the desk-scale code");
    }

    #[test]
    fn random_info_words_always_encode_to_codewords() {
        // 10^4 random information words on a desk-scale code.
        let code = generate_regular_code(96, 3, 6, 5).unwrap();
        let mut rng = crate::util::keyed_rng(5, 1, 0);
        for _ in 0..10_000 {
            let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..=1u8)).collect();
            let cw = code.encode_bits(&info).unwrap();
            assert_eq!(&cw[..code.k()], &info[..]);
            assert!(code.is_codeword(&cw).unwrap());
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(generate_regular_code(0, 3, 6, 1).is_err());
        assert!(generate_regular_code(10, 3, 7, 1).is_err()); // 30 not divisible by 7
        assert!(generate_regular_code(4, 3, 12, 1).is_err()); // col weight > row count
    }
}
