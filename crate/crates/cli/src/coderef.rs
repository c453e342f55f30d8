//! Code references: either an alist file on disk or a seeded generator
//! spec.
//!
//! Forms: `path/to/code.alist`, `alist:path`, or
//! `gallager:<n>:<seed>[:<col_weight>:<row_weight>]` (weights default to
//! the regular (3,6) construction).

use std::path::Path;

use nrldpc_core::ldpc::{generate_regular_code, load_alist_path, ParityCheckCode};

use crate::error::{CliError, CliResult};

pub fn load_code(reference: &str) -> CliResult<ParityCheckCode> {
    if let Some(rest) = reference.strip_prefix("gallager:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 && parts.len() != 4 {
            return Err(CliError::usage(format!(
                "gallager spec needs n:seed or n:seed:wc:wr, got {reference:?}"
            )));
        }
        let n: usize = parts[0]
            .parse()
            .map_err(|_| CliError::usage(format!("bad code length in {reference:?}")))?;
        let seed: u64 = parts[1]
            .parse()
            .map_err(|_| CliError::usage(format!("bad seed in {reference:?}")))?;
        let (wc, wr) = if parts.len() == 4 {
            (
                parts[2].parse().map_err(|_| CliError::usage("bad column weight"))?,
                parts[3].parse().map_err(|_| CliError::usage("bad row weight"))?,
            )
        } else {
            (3, 6)
        };
        return Ok(generate_regular_code(n, wc, wr, seed)?);
    }
    let path = reference.strip_prefix("alist:").unwrap_or(reference);
    Ok(load_alist_path(Path::new(path))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_specs_parse() {
        let code = load_code("gallager:48:7").unwrap();
        assert_eq!(code.n(), 48);
        let custom = load_code("gallager:40:1:2:4").unwrap();
        assert_eq!(custom.n(), 40);
        assert!(load_code("gallager:48").is_err());
        assert!(load_code("gallager:x:1").is_err());
    }

    #[test]
    fn alist_paths_round_trip() {
        let code = load_code("gallager:24:3").unwrap();
        let dir = std::env::temp_dir().join(format!("coderef-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.alist");
        std::fs::write(&path, nrldpc_core::ldpc::to_alist(&code)).unwrap();
        let loaded = load_code(path.to_str().unwrap()).unwrap();
        assert_eq!(loaded.n(), code.n());
        assert_eq!(loaded.k(), code.k());
        let missing = load_code(dir.join("nope.alist").to_str().unwrap());
        assert!(missing.is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
