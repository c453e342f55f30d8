//! Markov-source specs for configs and flags.
//!
//! Forms:
//! - `uniform` — memoryless fair bits,
//! - `bernoulli:<p1>` — memoryless with the given probability of 1,
//! - `runs:<order>:<hi>` — run-structured redundancy: an all-ones context
//!   emits 1 with probability `hi`, an all-zeros context with `1 - hi`,
//!   every other context is fair,
//! - `order=<m>;t=<p,...>[;init=uniform|<p,...>]` — explicit table.

use nrldpc_core::nr::MarkovSource;

use crate::error::{CliError, CliResult};

pub fn parse_markov_spec(spec: &str) -> CliResult<MarkovSource> {
    let spec = spec.trim();
    if spec == "uniform" {
        return Ok(MarkovSource::bernoulli(0.5).expect("valid"));
    }
    if let Some(p) = spec.strip_prefix("bernoulli:") {
        let p: f64 = p
            .parse()
            .map_err(|_| CliError::usage(format!("bad probability in {spec:?}")))?;
        return MarkovSource::bernoulli(p).map_err(|e| CliError::usage(e.to_string()));
    }
    if let Some(rest) = spec.strip_prefix("runs:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(CliError::usage(format!("runs spec needs order:hi, got {spec:?}")));
        }
        let order: usize = parts[0]
            .parse()
            .map_err(|_| CliError::usage(format!("bad order in {spec:?}")))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|_| CliError::usage(format!("bad probability in {spec:?}")))?;
        if !(0.5..1.0).contains(&hi) {
            return Err(CliError::usage("runs probability must be in [0.5, 1)"));
        }
        let states = 1usize << order;
        let table: Vec<f64> = (0..states)
            .map(|s| {
                if s == states - 1 {
                    hi
                } else if s == 0 {
                    1.0 - hi
                } else {
                    0.5
                }
            })
            .collect();
        return MarkovSource::with_uniform_initial(order, table)
            .map_err(|e| CliError::usage(e.to_string()));
    }
    // Explicit form.
    let mut order: Option<usize> = None;
    let mut table: Option<Vec<f64>> = None;
    let mut init: Option<String> = None;
    for field in spec.split(';') {
        let Some((key, value)) = field.split_once('=') else {
            return Err(CliError::usage(format!("bad markov field {field:?}")));
        };
        match key.trim() {
            "order" => {
                order = Some(
                    value
                        .trim()
                        .parse()
                        .map_err(|_| CliError::usage(format!("bad order {value:?}")))?,
                )
            }
            "t" => {
                table = Some(parse_prob_list(value)?);
            }
            "init" => init = Some(value.trim().to_string()),
            other => return Err(CliError::usage(format!("unknown markov field {other:?}"))),
        }
    }
    let order = order.ok_or_else(|| CliError::usage("markov spec missing `order`"))?;
    let table = table.ok_or_else(|| CliError::usage("markov spec missing `t`"))?;
    match init.as_deref() {
        None | Some("uniform") => {
            MarkovSource::with_uniform_initial(order, table).map_err(|e| CliError::usage(e.to_string()))
        }
        Some(list) => {
            let init = parse_prob_list(list)?;
            MarkovSource::new(order, table, init).map_err(|e| CliError::usage(e.to_string()))
        }
    }
}

fn parse_prob_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad probability {s:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        assert_eq!(parse_markov_spec("uniform").unwrap().order(), 0);
        let b = parse_markov_spec("bernoulli:0.8").unwrap();
        assert_eq!(b.transitions(), &[0.8]);
        let runs = parse_markov_spec("runs:2:0.97").unwrap();
        assert_eq!(runs.order(), 2);
        for (got, want) in runs.transitions().iter().zip(&[0.03, 0.5, 0.5, 0.97]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_tables_parse() {
        let src = parse_markov_spec("order=1;t=0.2,0.9").unwrap();
        assert_eq!(src.order(), 1);
        assert_eq!(src.transitions(), &[0.2, 0.9]);
        let src = parse_markov_spec("order=1;t=0.2,0.9;init=0.25,0.75").unwrap();
        assert_eq!(src.initial(), &[0.25, 0.75]);
    }

    #[test]
    fn malformed_specs_are_usage_errors() {
        assert!(parse_markov_spec("runs:2").is_err());
        assert!(parse_markov_spec("order=1").is_err());
        assert!(parse_markov_spec("order=1;t=0.2").is_err()); // wrong table size
        assert!(parse_markov_spec("what").is_err());
    }
}
