//! Pipeline orchestration and benchmark harness behind the `nrldpc`
//! binary: configuration, code references, the end-to-end segment decoder,
//! paired-trial benchmarks and their CSV/JSON reports.

pub mod coderef;
pub mod config;
pub mod error;
pub mod markov_spec;
pub mod pipeline;
pub mod report;
pub mod table2;
pub mod train_cmds;
pub mod words;

pub use config::{ExperimentConfig, RawConfig, SourceSpec};
pub use error::{CliError, CliResult};
pub use pipeline::{decode_segment, run_benchmark, DecodeMode, PipelineContext, SegmentDiagnostics};
pub use report::{BenchRow, BenchmarkResult, TrialRecord};
