//! Cycle-accurate simulator of the semi-parallel SC decoder architecture.
//!
//! The modeled datapath has `P` decoding processing elements fed by two
//! kinds of LLR memory (a double-banked channel memory in the `Qc` format and
//! per-stage internal buffers in the wider `Q` format), a chained PE that
//! computes `f` and `g` back to back at stage 0 and emits two decoded bits
//! per cycle, a frozen-bit ROM, and a semi-parallel partial-sum encoder
//! (`P/2` encoding PEs) that mirrors the decoding graph with XOR and
//! pass-through nodes. Decoder and encoder activations are strictly
//! serialized; the simulator accounts every cycle and can record a full
//! per-cycle trace of memory traffic and emitted bits.

mod memory;
mod sim;
mod trace;

pub use memory::MemoryModel;
pub use sim::{partial_sum, simulate_decode, SimOptions, SimResult, SimStats, Simulator};
pub use trace::{write_trace_csv, DecFunc, Mem, TraceEvent, Unit};

use crate::code::PolarCode;
use crate::llr::QuantScheme;
use crate::{Error, Result};

/// Architecture parameters: PE count, quantization and the code (ROM).
#[derive(Debug, Clone)]
pub struct ArchConfig {
    pub p: usize,
    pub scheme: QuantScheme,
    pub code: PolarCode,
}

impl ArchConfig {
    pub fn new(p: usize, scheme: QuantScheme, code: PolarCode) -> Result<Self> {
        let cfg = Self { p, scheme, code };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.code.len();
        if !self.p.is_power_of_two() || self.p < 2 {
            return Err(Error::InvalidParameter(format!(
                "P must be a power of two >= 2, got {}",
                self.p
            )));
        }
        if self.p > n / 4 {
            return Err(Error::InvalidParameter(format!(
                "P={} exceeds N/4={} (the stage count N/(4P) must be at least 1)",
                self.p,
                n / 4
            )));
        }
        Ok(())
    }

    /// Memory geometry implied by this configuration.
    pub fn memory_model(&self) -> MemoryModel {
        MemoryModel::new(self.code.n_log2(), self.p, self.scheme)
    }
}
