//! Reader and writer for the alist sparse-matrix format (MacKay
//! convention): whitespace-separated integers, 1-based indices.
//!
//! Layout: `n m`, then `max_col_degree max_row_degree`, then the n column
//! degrees, the m row degrees, one index list per column (row indices) and
//! one per row (column indices). Both the padded variant (every list
//! written at max degree, filled with zeros) and the unpadded variant are
//! accepted; the two redundant halves are cross-checked.

use std::path::Path;

use crate::error::{Error, Result};
use crate::ldpc::ParityCheckCode;

struct Tokens {
    values: Vec<i64>,
    pos: usize,
}

impl Tokens {
    fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for tok in text.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::Alist(format!("non-integer token {tok:?}")))?;
            values.push(v);
        }
        Ok(Self { values, pos: 0 })
    }

    fn next(&mut self, what: &str) -> Result<i64> {
        let v = self
            .values
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::Alist(format!("unexpected end of input reading {what}")))?;
        self.pos += 1;
        Ok(v)
    }

    fn next_size(&mut self, what: &str) -> Result<usize> {
        let v = self.next(what)?;
        if v < 0 {
            return Err(Error::Alist(format!("{what} is negative: {v}")));
        }
        Ok(v as usize)
    }

    fn remaining(&self) -> usize {
        self.values.len() - self.pos
    }
}

/// Parse alist text into a [`ParityCheckCode`]. The systematic permutation
/// is computed immediately; dependent rows are dropped (see
/// [`ParityCheckCode::dropped_rows`]).
pub fn load_alist(text: &str) -> Result<ParityCheckCode> {
    load_alist_named(text, "alist")
}

/// Parse an alist file from disk.
pub fn load_alist_path(path: &Path) -> Result<ParityCheckCode> {
    let text = std::fs::read_to_string(path)?;
    load_alist_named(&text, &path.display().to_string())
}

fn load_alist_named(text: &str, source: &str) -> Result<ParityCheckCode> {
    let mut t = Tokens::parse(text)?;
    let n = t.next_size("n")?;
    let m = t.next_size("m")?;
    if n == 0 || m == 0 {
        return Err(Error::Alist(format!("degenerate dimensions n={n}, m={m}")));
    }
    let max_col = t.next_size("max column degree")?;
    let max_row = t.next_size("max row degree")?;

    let mut col_deg = Vec::with_capacity(n);
    for i in 0..n {
        let d = t.next_size(&format!("degree of column {i}"))?;
        if d > max_col {
            return Err(Error::Alist(format!(
                "column {i} degree {d} exceeds declared maximum {max_col}"
            )));
        }
        col_deg.push(d);
    }
    let mut row_deg = Vec::with_capacity(m);
    for j in 0..m {
        let d = t.next_size(&format!("degree of row {j}"))?;
        if d > max_row {
            return Err(Error::Alist(format!(
                "row {j} degree {d} exceeds declared maximum {max_row}"
            )));
        }
        row_deg.push(d);
    }

    // Decide between padded and unpadded index lists by total token count.
    let unpadded: usize = col_deg.iter().sum::<usize>() + row_deg.iter().sum::<usize>();
    let padded = n * max_col + m * max_row;
    let remaining = t.remaining();
    let is_padded = if remaining == unpadded {
        false
    } else if remaining == padded {
        true
    } else {
        return Err(Error::Alist(format!(
            "index section has {remaining} tokens; expected {unpadded} (unpadded) or {padded} (padded)"
        )));
    };

    let read_list = |t: &mut Tokens, deg: usize, width: usize, what: &str| -> Result<Vec<usize>> {
        let count = if is_padded { width } else { deg };
        let mut out = Vec::with_capacity(deg);
        for idx in 0..count {
            let v = t.next(what)?;
            if idx < deg {
                if v < 1 {
                    return Err(Error::Alist(format!("{what}: index {v} is not 1-based")));
                }
                out.push((v - 1) as usize);
            } else if v != 0 {
                return Err(Error::Alist(format!("{what}: nonzero padding entry {v}")));
            }
        }
        Ok(out)
    };

    let mut cols: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (i, &deg) in col_deg.iter().enumerate() {
        let list = read_list(&mut t, deg, max_col, &format!("column {i}"))?;
        for &r in &list {
            if r >= m {
                return Err(Error::IndexOutOfRange(format!(
                    "column {i} references row {} > m = {m}",
                    r + 1
                )));
            }
        }
        cols.push(list);
    }
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(m);
    for (j, &deg) in row_deg.iter().enumerate() {
        let list = read_list(&mut t, deg, max_row, &format!("row {j}"))?;
        for &c in &list {
            if c >= n {
                return Err(Error::IndexOutOfRange(format!(
                    "row {j} references column {} > n = {n}",
                    c + 1
                )));
            }
        }
        rows.push(list);
    }
    if t.remaining() != 0 {
        return Err(Error::Alist(format!("{} trailing tokens", t.remaining())));
    }

    // Cross-check the two redundant halves.
    let mut from_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (c, list) in cols.iter().enumerate() {
        for &r in list {
            from_cols[r].push(c);
        }
    }
    for j in 0..m {
        let mut a = from_cols[j].clone();
        let mut b = rows[j].clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::Alist(format!(
                "row {j} disagrees between row list and column lists"
            )));
        }
    }

    ParityCheckCode::from_sparse_rows(n, rows, source)
}

/// Serialize the kept parity checks of a code back to alist text
/// (unpadded variant, original column order).
pub fn to_alist(code: &ParityCheckCode) -> String {
    let n = code.n();
    let rows = code.rows();
    let m = rows.len();
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, row) in rows.iter().enumerate() {
        for &c in row {
            cols[c].push(j);
        }
    }
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = rows.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = String::new();
    out.push_str(&format!("{n} {m}\n{max_col} {max_row}\n"));
    out.push_str(&join(cols.iter().map(Vec::len)));
    out.push('\n');
    out.push_str(&join(rows.iter().map(Vec::len)));
    out.push('\n');
    for col in &cols {
        out.push_str(&join(col.iter().map(|&r| r + 1)));
        out.push('\n');
    }
    for row in rows {
        out.push_str(&join(row.iter().map(|&c| c + 1)));
        out.push('\n');
    }
    out
}

fn join(items: impl Iterator<Item = usize>) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}
