//! The cycle-stepped simulation engine.

use super::trace::{DecFunc, Mem, TraceEvent, Unit};
use super::{ArchConfig, MemoryModel};
use crate::code::{bit_reverse_unchecked, butterfly_transform, PolarCode};
use crate::llr::{f_minsum_raw, g_raw, hard_decision_raw, FxLLR};
use crate::{Error, Result};

/// Simulator switches. `chained` disables the stage-0 chained PE when false
/// (diagnostic mode used to measure the N/2-cycle saving); partial-sum
/// checking compares every value consumed by a `g` activation against the
/// direct re-encoding oracle.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub trace: bool,
    pub chained: bool,
    pub check_partial_sums: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            trace: false,
            chained: true,
            check_partial_sums: false,
        }
    }
}

/// Cycle and access accounting collected during a run.
#[derive(Debug, Clone, Default)]
pub struct SimStats {
    /// Cycles occupied by decoder activations (including stage 0).
    pub decoder_cycles: u64,
    /// Cycles occupied by partial-sum encoder activations.
    pub encoder_cycles: u64,
    /// Frozen-ROM reads (one per emitted bit).
    pub rom_reads: u64,
    /// Channel-memory word reads.
    pub channel_reads: u64,
    /// Cycle of the last channel-memory read.
    pub last_channel_read_cycle: Option<u64>,
    /// Cycle in which bit N/2 was emitted.
    pub midpoint_emit_cycle: Option<u64>,
    /// Channel reads that happened at or after the midpoint emission.
    pub channel_reads_after_midpoint: u64,
    /// Cycles where frame loading wrote a channel word that was read the
    /// same cycle. Must stay zero.
    pub channel_rw_conflicts: u64,
    /// Peak occupied bits, counted in whole hardware words.
    pub peak_channel_bits: u64,
    pub peak_internal_bits: u64,
    pub peak_psum_bits: u64,
}

/// Outcome of one simulated frame.
#[derive(Debug, Clone)]
pub struct SimResult {
    /// Estimated bits in decoding order, frozen positions zero.
    pub u_hat: Vec<u8>,
    /// Cycle index of the last emitted bit, plus one.
    pub cycles: u64,
    /// Per-cycle trace (empty unless tracing was enabled).
    pub trace: Vec<TraceEvent>,
    pub stats: SimStats,
}

#[derive(Debug, Clone, Copy)]
enum Act {
    DecF { stage: u32 },
    DecG { stage: u32 },
    Chained,
    Stage0F,
    Stage0G,
    Enc { stage: u32 },
}

struct PsumStage {
    gens: [Vec<u8>; 2],
    /// Generation the next write lands in; the freshly written generation is
    /// therefore `wgen ^ 1`.
    wgen: u8,
    dual: bool,
    written: [Vec<bool>; 2],
}

/// One instance simulates one frame at a time; run several instances for
/// frame-level parallelism.
pub struct Simulator {
    cfg: ArchConfig,
    opts: SimOptions,
    mem: MemoryModel,
    n_log2: u32,
    n: usize,
    p: usize,
    sat: i32,

    chan: Vec<i32>,
    chan_written: Vec<bool>,
    internal: Vec<Vec<i32>>,
    internal_written: Vec<Vec<bool>>,
    psum: Vec<PsumStage>,

    u_hat: Vec<u8>,
    emitted: usize,
    last_emit_cycle: u64,
    pending_f_bit: u8,

    cycle: u64,
    pair: usize,
    acts: Vec<(Act, u32)>,
    act_idx: usize,
    act_cycle: u32,
    running: bool,

    next_frame: Option<Vec<i32>>,
    load_word: usize,
    next_frame_ready: bool,

    trace: Vec<TraceEvent>,
    stats: SimStats,
    psum_expected: Vec<u8>,
}

impl Simulator {
    pub fn new(cfg: ArchConfig) -> Result<Self> {
        Self::with_options(cfg, SimOptions::default())
    }

    pub fn with_options(cfg: ArchConfig, opts: SimOptions) -> Result<Self> {
        cfg.validate()?;
        let n_log2 = cfg.code.n_log2();
        let n = cfg.code.len();
        let p = cfg.p;
        let mem = cfg.memory_model();
        let internal: Vec<Vec<i32>> = (0..n_log2)
            .map(|l| vec![0i32; mem.internal_slots(l)])
            .collect();
        let internal_written = (0..n_log2)
            .map(|l| vec![false; mem.internal_words(l)])
            .collect();
        let psum = (1..n_log2)
            .map(|m| {
                let slots = mem.psum_slots(m);
                let words = mem.psum_words(m);
                PsumStage {
                    gens: [vec![0u8; slots], vec![0u8; slots]],
                    wgen: 0,
                    dual: mem.psum_generations(m) == 2,
                    written: [vec![false; words], vec![false; words]],
                }
            })
            .collect();
        Ok(Self {
            sat: cfg.scheme.max_raw_internal(),
            n_log2,
            n,
            p,
            mem,
            opts,
            chan: vec![0i32; n],
            chan_written: vec![false; n / p],
            internal,
            internal_written,
            psum,
            u_hat: vec![0u8; n],
            emitted: 0,
            last_emit_cycle: 0,
            pending_f_bit: 0,
            cycle: 0,
            pair: 0,
            acts: Vec::new(),
            act_idx: 0,
            act_cycle: 0,
            running: false,
            next_frame: None,
            load_word: 0,
            next_frame_ready: false,
            trace: Vec::new(),
            stats: SimStats::default(),
            psum_expected: Vec::new(),
            cfg,
        })
    }

    pub fn config(&self) -> &ArchConfig {
        &self.cfg
    }

    /// Loads a channel-quantized frame and arms the schedule.
    pub fn start(&mut self, channel_llrs: &[FxLLR]) -> Result<()> {
        let raw = self.check_frame(channel_llrs)?;
        self.chan = raw;
        self.start_common();
        Ok(())
    }

    /// Starts decoding the frame previously staged by
    /// [`Simulator::load_next_frame`] (already resident in channel memory).
    pub fn start_loaded(&mut self) -> Result<()> {
        if !self.next_frame_ready {
            return Err(Error::InvalidParameter(
                "no fully loaded next frame is available".into(),
            ));
        }
        self.next_frame_ready = false;
        self.start_common();
        Ok(())
    }

    fn start_common(&mut self) {
        for b in self.chan_written.iter_mut() {
            *b = true;
        }
        for stage in self.internal_written.iter_mut() {
            for w in stage.iter_mut() {
                *w = false;
            }
        }
        for ps in self.psum.iter_mut() {
            ps.wgen = 0;
            for half in ps.written.iter_mut() {
                for w in half.iter_mut() {
                    *w = false;
                }
            }
        }
        self.u_hat.iter_mut().for_each(|b| *b = 0);
        self.emitted = 0;
        self.last_emit_cycle = 0;
        self.cycle = 0;
        self.pair = 0;
        self.act_idx = 0;
        self.act_cycle = 0;
        self.running = true;
        self.next_frame = None;
        self.load_word = 0;
        self.trace.clear();
        self.stats = SimStats::default();
        self.build_pair_schedule();
    }

    fn check_frame(&self, channel_llrs: &[FxLLR]) -> Result<Vec<i32>> {
        if channel_llrs.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: channel_llrs.len(),
            });
        }
        let qc = self.cfg.scheme.qc();
        channel_llrs
            .iter()
            .map(|v| {
                if v.bits() != qc {
                    Err(Error::FormatMismatch(v.bits(), qc))
                } else {
                    Ok(v.raw())
                }
            })
            .collect()
    }

    /// Stages the next frame for cycle-by-cycle loading into the channel
    /// memory while the current frame finishes. Channel LLRs are dead once
    /// bit N/2 has been emitted, so loading before that is a contention
    /// error.
    pub fn load_next_frame(&mut self, channel_llrs: &[FxLLR]) -> Result<()> {
        if !self.running {
            return Err(Error::InvalidParameter(
                "load_next_frame requires a decode in progress".into(),
            ));
        }
        if self.emitted <= self.n / 2 {
            return Err(Error::Contention(format!(
                "channel memory still live: only {} of {} bits emitted (bit N/2 = {} not yet decoded)",
                self.emitted,
                self.n,
                self.n / 2
            )));
        }
        if self.next_frame.is_some() {
            return Err(Error::InvalidParameter(
                "a next frame is already being loaded".into(),
            ));
        }
        let raw = self.check_frame(channel_llrs)?;
        self.next_frame = Some(raw);
        self.load_word = 0;
        Ok(())
    }

    pub fn is_running(&self) -> bool {
        self.running
    }

    pub fn emitted_bits(&self) -> usize {
        self.emitted
    }

    /// Runs the staged schedule to completion and packages the result.
    pub fn finish(&mut self) -> Result<SimResult> {
        while self.step() {}
        // Next-frame loading that did not complete in-run keeps writing one
        // word per bank per cycle past the end; decode latency is unaffected.
        while self.next_frame.is_some() {
            let mut ev = TraceEvent::new(self.cycle, None);
            self.do_load_writes(&mut ev);
            self.push_event(ev);
            self.cycle += 1;
        }
        self.collect_peaks();
        Ok(SimResult {
            u_hat: self.u_hat.clone(),
            cycles: self.last_emit_cycle + 1,
            trace: std::mem::take(&mut self.trace),
            stats: std::mem::replace(&mut self.stats, SimStats::default()),
        })
    }

    /// Convenience wrapper: one whole frame.
    pub fn run(&mut self, channel_llrs: &[FxLLR]) -> Result<SimResult> {
        self.start(channel_llrs)?;
        self.finish()
    }

    /// Executes one clock cycle. Returns false once the last bit pair has
    /// been emitted.
    pub fn step(&mut self) -> bool {
        if !self.running {
            return false;
        }
        let (act, act_cycles) = self.acts[self.act_idx];
        let mut ev = TraceEvent::new(self.cycle, Some(unit_of(act)));

        match act {
            Act::DecF { stage } => self.exec_dec(stage, DecFunc::F, &mut ev),
            Act::DecG { stage } => self.exec_dec(stage, DecFunc::G, &mut ev),
            Act::Chained => self.exec_stage0(true, false, &mut ev),
            Act::Stage0F => self.exec_stage0(false, false, &mut ev),
            Act::Stage0G => self.exec_stage0(false, true, &mut ev),
            Act::Enc { stage } => self.exec_enc(stage, &mut ev),
        }
        match act {
            Act::Enc { .. } => self.stats.encoder_cycles += 1,
            _ => self.stats.decoder_cycles += 1,
        }
        self.do_load_writes(&mut ev);
        self.push_event(ev);

        self.act_cycle += 1;
        if self.act_cycle == act_cycles {
            self.act_cycle = 0;
            if let Act::Enc { stage } = act {
                // The generation just written becomes the newest one.
                let dst = stage as usize + 1;
                if self.psum_dual(dst as u32) {
                    self.psum[dst - 1].wgen ^= 1;
                }
            }
            self.act_idx += 1;
            if self.act_idx == self.acts.len() {
                self.pair += 1;
                if self.pair == self.n / 2 {
                    self.running = false;
                } else {
                    self.build_pair_schedule();
                }
            }
        }
        self.cycle += 1;
        self.running
    }

    // -- schedule -----------------------------------------------------------

    /// Queues all activations for the current bit pair: the decoder work that
    /// leads to its chained stage-0 activation, then the encoder stages
    /// triggered by the pair (skipped entirely for the last pair, whose
    /// trailing encoder work is never performed).
    fn build_pair_schedule(&mut self) {
        let n = self.n_log2;
        let m = self.pair;
        self.acts.clear();
        self.act_idx = 0;
        if m == 0 {
            for l in (1..n).rev() {
                self.push_dec(Act::DecF { stage: l }, l);
            }
        } else {
            let s = m.trailing_zeros() + 1;
            self.push_dec(Act::DecG { stage: s }, s);
            for l in (1..s).rev() {
                self.push_dec(Act::DecF { stage: l }, l);
            }
        }
        if self.opts.chained {
            self.acts.push((Act::Chained, 1));
        } else {
            self.acts.push((Act::Stage0F, 1));
            self.acts.push((Act::Stage0G, 1));
        }
        if m + 1 < self.n / 2 {
            let mut le = 0u32;
            while le <= n - 2 && (m + 1) % (1usize << le) == 0 {
                let cycles = ((1usize << (le + 1)) / self.p).max(1) as u32;
                self.acts.push((Act::Enc { stage: le }, cycles));
                le += 1;
            }
        }
    }

    fn push_dec(&mut self, act: Act, stage: u32) {
        let cycles = ((1usize << stage) / self.p).max(1) as u32;
        self.acts.push((act, cycles));
    }

    // -- execution ----------------------------------------------------------

    fn exec_dec(&mut self, stage: u32, func: DecFunc, ev: &mut TraceEvent) {
        let out = 1usize << stage;
        let w = out.min(self.p);
        let c = self.act_cycle as usize;
        let j0 = c * self.p;
        let top = stage == self.n_log2 - 1;

        if func == DecFunc::G && self.opts.check_partial_sums {
            if self.act_cycle == 0 {
                self.compute_expected_psums(stage);
            }
            let newest = self.psum_newest(stage);
            for j in j0..j0 + w {
                let got = self.psum[stage as usize - 1].gens[newest as usize][j];
                assert_eq!(
                    got, self.psum_expected[j],
                    "partial sum mismatch at stage {stage} index {j}"
                );
            }
        }

        for j in j0..j0 + w {
            let (a, b) = if top {
                (self.chan[j], self.chan[j + out])
            } else {
                let src = &self.internal[stage as usize + 1];
                (src[j], src[j + out])
            };
            let r = match func {
                DecFunc::F => f_minsum_raw(a, b),
                DecFunc::G => {
                    let newest = self.psum_newest(stage);
                    let s = self.psum[stage as usize - 1].gens[newest as usize][j];
                    g_raw(s, a, b, self.sat)
                }
                DecFunc::Fg => unreachable!(),
            };
            self.internal[stage as usize][j] = r;
        }

        // reads
        if top {
            ev.reads.push((Mem::Ch(0), c));
            ev.reads.push((Mem::Ch(1), c));
            self.note_channel_read();
        } else {
            let wa = j0 / self.p;
            let wb = (j0 + out) / self.p;
            ev.reads.push((Mem::Int(stage + 1), wa));
            if wb != wa {
                ev.reads.push((Mem::Int(stage + 1), wb));
            }
        }
        if func == DecFunc::G {
            let newest = self.psum_newest(stage);
            ev.reads.push((
                Mem::Ps {
                    stage,
                    half: newest,
                },
                c,
            ));
        }
        // write
        ev.writes.push((Mem::Int(stage), c));
        self.internal_written[stage as usize][c] = true;
    }

    fn exec_stage0(&mut self, chained: bool, g_only: bool, ev: &mut TraceEvent) {
        let m = self.pair;
        let a = self.internal[1][0];
        let b = self.internal[1][1];
        ev.reads.push((Mem::Int(1), 0));

        if chained {
            let f_res = f_minsum_raw(a, b);
            let bit0 = self.decide(2 * m, f_res);
            let g_res = g_raw(bit0, a, b, self.sat);
            let bit1 = self.decide(2 * m + 1, g_res);
            self.internal[0][0] = g_res;
            ev.reads.push((Mem::Rom, 2 * m));
            ev.reads.push((Mem::Rom, 2 * m + 1));
            self.stats.rom_reads += 2;
            self.emit(2 * m, bit0, ev);
            self.emit(2 * m + 1, bit1, ev);
        } else if !g_only {
            let f_res = f_minsum_raw(a, b);
            let bit0 = self.decide(2 * m, f_res);
            self.pending_f_bit = bit0;
            self.internal[0][0] = f_res;
            ev.reads.push((Mem::Rom, 2 * m));
            self.stats.rom_reads += 1;
            self.emit(2 * m, bit0, ev);
        } else {
            let g_res = g_raw(self.pending_f_bit, a, b, self.sat);
            let bit1 = self.decide(2 * m + 1, g_res);
            self.internal[0][0] = g_res;
            ev.reads.push((Mem::Rom, 2 * m + 1));
            self.stats.rom_reads += 1;
            self.emit(2 * m + 1, bit1, ev);
        }
        ev.writes.push((Mem::Int(0), 0));
        self.internal_written[0][0] = true;
    }

    fn exec_enc(&mut self, stage: u32, ev: &mut TraceEvent) {
        if stage == 0 {
            // The two bits decoded this pair enter the encoder directly.
            let b0 = self.u_hat[2 * self.pair];
            let b1 = self.u_hat[2 * self.pair + 1];
            let g = self.psum[0].wgen as usize;
            self.psum[0].gens[g][0] = b0 ^ b1;
            self.psum[0].gens[g][1] = b1;
            self.psum[0].written[g][0] = true;
            ev.writes.push((
                Mem::Ps {
                    stage: 1,
                    half: g as u8,
                },
                0,
            ));
            return;
        }

        let pairs = 1usize << stage;
        let pc = pairs.min(self.p / 2).max(1);
        let j0 = self.act_cycle as usize * (self.p / 2).max(1);
        let src_idx = stage as usize - 1;
        let dst_idx = stage as usize;
        let older = self.psum[src_idx].wgen as usize;
        let newer = older ^ 1;
        let dst_gen = self.psum[dst_idx].wgen as usize;

        for j in j0..j0 + pc {
            let x = self.psum[src_idx].gens[older][j];
            let y = self.psum[src_idx].gens[newer][j];
            self.psum[dst_idx].gens[dst_gen][j] = x ^ y; // XOR node
            self.psum[dst_idx].gens[dst_gen][j + pairs] = y; // pass-through node
        }

        let src_word = j0 / self.p;
        ev.reads.push((
            Mem::Ps {
                stage,
                half: older as u8,
            },
            src_word,
        ));
        ev.reads.push((
            Mem::Ps {
                stage,
                half: newer as u8,
            },
            src_word,
        ));
        let wf = j0 / self.p;
        let wg = (j0 + pairs) / self.p;
        let dst_mem = Mem::Ps {
            stage: stage + 1,
            half: dst_gen as u8,
        };
        ev.writes.push((dst_mem, wf));
        self.psum[dst_idx].written[dst_gen][wf] = true;
        if wg != wf {
            ev.writes.push((dst_mem, wg));
            self.psum[dst_idx].written[dst_gen][wg] = true;
        }
    }

    // -- helpers -------------------------------------------------------------

    fn decide(&self, idx: usize, llr: i32) -> u8 {
        if self.cfg.code.is_frozen(idx) {
            0
        } else {
            hard_decision_raw(llr)
        }
    }

    fn emit(&mut self, idx: usize, bit: u8, ev: &mut TraceEvent) {
        self.u_hat[idx] = bit;
        self.emitted += 1;
        self.last_emit_cycle = self.cycle;
        ev.emitted.push((idx, bit));
        if idx == self.n / 2 {
            self.stats.midpoint_emit_cycle = Some(self.cycle);
        }
    }

    /// Newest (most recently written) generation of a partial-sum stage.
    fn psum_newest(&self, stage: u32) -> u8 {
        let ps = &self.psum[stage as usize - 1];
        if ps.dual {
            ps.wgen ^ 1
        } else {
            0
        }
    }

    fn psum_dual(&self, stage: u32) -> bool {
        self.psum[stage as usize - 1].dual
    }

    fn note_channel_read(&mut self) {
        self.stats.channel_reads += 2;
        self.stats.last_channel_read_cycle = Some(self.cycle);
        if self.stats.midpoint_emit_cycle.is_some() {
            self.stats.channel_reads_after_midpoint += 2;
        }
    }

    fn do_load_writes(&mut self, ev: &mut TraceEvent) {
        let words = self.mem.channel_words_per_bank();
        let Some(frame) = &self.next_frame else {
            return;
        };
        let w = self.load_word;
        let half = self.n / 2;
        let base0 = w * self.p;
        let base1 = half + w * self.p;
        let (dst0, dst1) = (base0..base0 + self.p, base1..base1 + self.p);
        self.chan[dst0.clone()].copy_from_slice(&frame[dst0]);
        self.chan[dst1.clone()].copy_from_slice(&frame[dst1]);
        ev.load_writes.push((Mem::Ch(0), w));
        ev.load_writes.push((Mem::Ch(1), w));
        // A same-cycle read of the word being written would be contention.
        for &(mem, addr) in &ev.reads {
            if (mem == Mem::Ch(0) || mem == Mem::Ch(1)) && addr == w {
                self.stats.channel_rw_conflicts += 1;
            }
        }
        self.load_word += 1;
        if self.load_word == words {
            self.next_frame = None;
            self.next_frame_ready = true;
        }
    }

    fn push_event(&mut self, ev: TraceEvent) {
        if self.opts.trace {
            self.trace.push(ev);
        }
    }

    /// Whole-word occupancy per memory kind, compared against the
    /// [`MemoryModel`] totals by the audit tests.
    fn collect_peaks(&mut self) {
        let chw = self.chan_written.iter().filter(|&&b| b).count() as u64;
        self.stats.peak_channel_bits = chw * self.cfg.scheme.qc() as u64 * self.p as u64;
        let mut int_bits = 0u64;
        for stage in &self.internal_written {
            int_bits += stage.iter().filter(|&&b| b).count() as u64
                * self.cfg.scheme.q() as u64
                * self.p as u64;
        }
        self.stats.peak_internal_bits = int_bits;
        let mut ps_bits = 0u64;
        for ps in &self.psum {
            for half in &ps.written {
                ps_bits += half.iter().filter(|&&b| b).count() as u64 * self.p as u64;
            }
        }
        self.stats.peak_psum_bits = ps_bits;
    }

    fn compute_expected_psums(&mut self, stage: u32) {
        let blk = 1usize << stage;
        let start = self.emitted - blk;
        self.psum_expected.clear();
        self.psum_expected.extend_from_slice(&self.u_hat[start..start + blk]);
        butterfly_transform(&mut self.psum_expected);
    }
}

fn unit_of(act: Act) -> Unit {
    match act {
        Act::DecF { stage } => Unit::Dec {
            stage,
            func: DecFunc::F,
        },
        Act::DecG { stage } => Unit::Dec {
            stage,
            func: DecFunc::G,
        },
        Act::Chained => Unit::Dec {
            stage: 0,
            func: DecFunc::Fg,
        },
        Act::Stage0F => Unit::Dec {
            stage: 0,
            func: DecFunc::F,
        },
        Act::Stage0G => Unit::Dec {
            stage: 0,
            func: DecFunc::G,
        },
        Act::Enc { stage } => Unit::Enc { stage },
    }
}

/// Simulates one frame with default options.
pub fn simulate_decode(cfg: &ArchConfig, channel_llrs: &[FxLLR]) -> Result<SimResult> {
    Simulator::new(cfg.clone())?.run(channel_llrs)
}

/// Direct-computation oracle for the partial sum `s_{l,j}` of the mirrored
/// encoding graph: `s_{0,j}` is the decoded bit at the bit-reversed index,
/// and stage `l` holds the `F^(⊗l)` re-encode of one aligned `2^l`-bit block
/// of decoded bits.
pub fn partial_sum(code: &PolarCode, decoded_prefix: &[u8], l: u32, j: usize) -> Result<u8> {
    let n = code.n_log2();
    if l > n || j >= code.len() {
        return Err(Error::InvalidParameter(format!(
            "partial_sum: stage {l} / index {j} out of range"
        )));
    }
    let t = bit_reverse_unchecked(j, n);
    let blk = 1usize << l;
    let k = t >> l;
    let r = t & (blk - 1);
    let end = (k + 1) * blk;
    if decoded_prefix.len() < end {
        return Err(Error::InvalidParameter(format!(
            "partial_sum: s_({l},{j}) needs {end} decoded bits, have {}",
            decoded_prefix.len()
        )));
    }
    let mut block = decoded_prefix[k * blk..end].to_vec();
    butterfly_transform(&mut block);
    Ok(block[r])
}
