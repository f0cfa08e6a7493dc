//! Bit-exact software model of a scalable semi-parallel successive-cancellation
//! (SC) decoder for polar codes.
//!
//! The crate is organized around the datapath of the hardware architecture it
//! models:
//!
//! * [`code`] — polar code construction (Bhattacharyya recursion), frozen-set
//!   management, non-systematic encoding and bit-reversal utilities.
//! * [`llr`] — LLR node functions (min-sum and sum-product), the
//!   `(Qi, Qic, Qf)` quantization scheme and saturating fixed-point arithmetic.
//! * [`decoder`] — golden-model recursive SC decoders (float SPA/MSA and
//!   fixed-point MSA) used as oracles for the architecture simulator.
//! * [`arch`] — cycle-accurate simulator of the semi-parallel architecture:
//!   P processing elements, chained PE at stage 0, split channel/internal LLR
//!   memories, the semi-parallel partial-sum encoder, and per-cycle tracing.
//! * [`metrics`] — closed-form latency, memory and throughput figures with a
//!   consistency check against simulation.
//! * [`channel`] / [`montecarlo`] — BPSK/AWGN channel model and a
//!   reproducible frame-parallel Monte Carlo BER/FER harness.

pub mod arch;
pub mod channel;
pub mod code;
pub mod decoder;
pub mod llr;
pub mod metrics;
pub mod montecarlo;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated an operation's preconditions.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A vector length did not match the owning code.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    /// Two fixed-point operands carried different formats.
    #[error("fixed-point format mismatch: {0}-bit vs {1}-bit operands")]
    FormatMismatch(u8, u8),
    /// A frozen-mask file could not be parsed.
    #[error("malformed frozen-mask file: {0}")]
    MaskFormat(String),
    /// A channel-memory access pattern would collide with frame loading.
    #[error("channel memory contention: {0}")]
    Contention(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use arch::{simulate_decode, ArchConfig, MemoryModel, SimOptions, SimResult, Simulator};
pub use code::{bit_reverse, PolarCode};
pub use decoder::{DecodeAlgo, ScDecoder};
pub use llr::{FxLLR, QuantScheme};
pub use montecarlo::{ErrorRatePoint, StopRule};
