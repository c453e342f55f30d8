//! Words files: one bit word per line, characters '0' and '1'.

use std::path::Path;

use nrldpc_core::bits::BitSegment;

use crate::error::{CliError, CliResult};

pub fn write_words(path: &Path, words: &[BitSegment]) -> CliResult<()> {
    let mut out = String::new();
    for w in words {
        for &b in w.bits() {
            out.push(if b == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a words file; every line must have length `expected_len` when one
/// is given.
pub fn read_words(path: &Path, expected_len: Option<usize>) -> CliResult<Vec<BitSegment>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut words = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut bits = Vec::with_capacity(line.len());
        for ch in line.chars() {
            match ch {
                '0' => bits.push(0u8),
                '1' => bits.push(1u8),
                other => {
                    return Err(CliError::data(format!(
                        "{} line {}: unexpected character {other:?}",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        if let Some(len) = expected_len {
            if bits.len() != len {
                return Err(CliError::data(format!(
                    "{} line {}: word has {} bits, expected {len}",
                    path.display(),
                    lineno + 1,
                    bits.len()
                )));
            }
        }
        words.push(BitSegment::from_bits(bits).expect("bits are 0/1"));
    }
    Ok(words)
}
