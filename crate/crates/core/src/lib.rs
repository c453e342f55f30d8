//! Error correction for noisy file segments that combines the residual
//! statistical redundancy of the data itself with a systematic LDPC code.
//!
//! The crate has three layers:
//!
//! * coding and channel primitives: [`ldpc`] (alist ingestion, GF(2)
//!   systematic forms, sum-product decoding) and [`channel`] (binary
//!   symmetric channel simulation and LLRs),
//! * a small deterministic neural-network engine in [`nn`] (1-D
//!   convolution/deconvolution, dense layers, AdaDelta, doubling-rate and
//!   cross-entropy losses) with the channel-probability estimator built on
//!   it in [`portfolio`],
//! * the soft decoders of [`nr`]: a file-type recognizer, conv-deconv
//!   per-bit posterior estimators, an exact Markov-source oracle, and the
//!   LLR fusion that feeds their output into belief propagation.
//!
//! Numeric kernels are generic over the scalar type through [`num::Real`]
//! (`f32` or `f64`); the aliases at the crate root fix `f64`, which is what
//! the decoding pipeline uses throughout.

pub mod bits;
pub mod channel;
pub mod corpus;
pub mod error;
pub mod ldpc;
pub mod nn;
pub mod nr;
pub mod num;
pub mod portfolio;
pub mod util;

pub use bits::BitSegment;
pub use error::{Error, Result};
pub use num::{Real, LLR_CLAMP, PROB_CLIP};

/// Log-likelihood ratios over `f64`, the pipeline default.
pub type LlrVector = ldpc::LlrVector<f64>;
/// Per-bit posterior probabilities over `f64`.
pub type SoftPosterior = nr::SoftPosterior<f64>;
/// Dense row-major tensor over `f64`.
pub type Tensor = nn::Tensor<f64>;
/// Layered feed-forward model over `f64`.
pub type LayerGraph = nn::LayerGraph<f64>;

/// Single-precision variants of the core numeric types.
pub type LlrVector32 = ldpc::LlrVector<f32>;
pub type SoftPosterior32 = nr::SoftPosterior<f32>;
pub type Tensor32 = nn::Tensor<f32>;
pub type LayerGraph32 = nn::LayerGraph<f32>;
