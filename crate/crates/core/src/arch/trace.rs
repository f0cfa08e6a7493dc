//! Per-cycle trace records and their CSV serialization.

use std::fmt;
use std::io::{self, Write};

/// Identifies one physical memory of the architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mem {
    /// Channel bank 0 (first half of the frame) or 1 (second half).
    Ch(u8),
    /// Internal LLR buffer of a decoding stage.
    Int(u32),
    /// Partial-sum buffer of an encoder stage; `half` selects the ping-pong
    /// generation (`a`/`b`; single-generation stages only use `a`).
    Ps { stage: u32, half: u8 },
    /// Frozen-bit ROM (addresses are bit indices).
    Rom,
}

impl fmt::Display for Mem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mem::Ch(bank) => write!(f, "ch{bank}"),
            Mem::Int(stage) => write!(f, "int{stage}"),
            Mem::Ps { stage, half } => {
                write!(f, "ps{stage}{}", if *half == 0 { 'a' } else { 'b' })
            }
            Mem::Rom => write!(f, "rom"),
        }
    }
}

/// Decoder PE function performed during an activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecFunc {
    F,
    G,
    /// Chained stage-0 activation: `f` then `g` in one cycle.
    Fg,
}

impl fmt::Display for DecFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecFunc::F => write!(f, "f"),
            DecFunc::G => write!(f, "g"),
            DecFunc::Fg => write!(f, "fg"),
        }
    }
}

/// The unit active in a cycle. The schedule is serialized, so a cycle has at
/// most one decoder or one encoder activation (frame loading may overlap).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Dec { stage: u32, func: DecFunc },
    Enc { stage: u32 },
}

/// Everything that happened in one clock cycle.
#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub cycle: u64,
    pub unit: Option<Unit>,
    /// Memory reads as (memory, word address); ROM addresses are bit indices.
    pub reads: Vec<(Mem, usize)>,
    pub writes: Vec<(Mem, usize)>,
    /// Decoded bits emitted this cycle as (bit index, value).
    pub emitted: Vec<(usize, u8)>,
    /// Channel writes performed by next-frame loading.
    pub load_writes: Vec<(Mem, usize)>,
}

impl TraceEvent {
    pub(crate) fn new(cycle: u64, unit: Option<Unit>) -> Self {
        Self {
            cycle,
            unit,
            reads: Vec::new(),
            writes: Vec::new(),
            emitted: Vec::new(),
            load_writes: Vec::new(),
        }
    }
}

/// Writes the trace in CSV form: header
/// `cycle,unit,stage,func,mem,addr,bits`, one row per memory access or
/// emission, reads before writes within a cycle, addresses ascending.
pub fn write_trace_csv<W: Write>(events: &[TraceEvent], out: &mut W) -> io::Result<()> {
    writeln!(out, "cycle,unit,stage,func,mem,addr,bits")?;
    for ev in events {
        let (unit, stage, func) = match ev.unit {
            Some(Unit::Dec { stage, func }) => ("dec", stage.to_string(), func.to_string()),
            Some(Unit::Enc { stage }) => ("enc", stage.to_string(), "e".to_string()),
            None => ("", String::new(), String::new()),
        };
        let mut reads = ev.reads.clone();
        reads.sort_unstable();
        for (mem, addr) in reads {
            writeln!(out, "{},{unit},{stage},{func},{mem},{addr},", ev.cycle)?;
        }
        let mut writes = ev.writes.clone();
        writes.sort_unstable();
        for (mem, addr) in writes {
            writeln!(out, "{},{unit},{stage},{func},{mem},{addr},", ev.cycle)?;
        }
        for &(idx, bit) in &ev.emitted {
            writeln!(out, "{},{unit},{stage},{func},out,{idx},{bit}", ev.cycle)?;
        }
        let mut loads = ev.load_writes.clone();
        loads.sort_unstable();
        for (mem, addr) in loads {
            writeln!(out, "{},load,,,{mem},{addr},", ev.cycle)?;
        }
    }
    Ok(())
}
