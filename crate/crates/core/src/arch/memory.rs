//! Memory geometry of the architecture.
//!
//! Word addressing is normative for traces: every buffer packs its slots
//! contiguously into `P`-wide words. The internal buffer of stage `l` holds
//! the stage's `2^l` outputs (padded to a `P`-LLR word minimum); operand
//! pairs for the stage below are fetched as two `P`-LLR words and
//! concatenated. Each partial-sum stage `m in [1, n-1]` holds the `F^(⊗m)`
//! re-encode of one completed `2^m`-bit block; all stages except `m = n-1`
//! are ping-pong buffered because the encoder combines the two most recent
//! blocks while the decoder may still consume the older one.

use crate::llr::QuantScheme;

/// Channel, internal, partial-sum and ROM geometry for a `(N, P, scheme)`
/// configuration.
#[derive(Debug, Clone)]
pub struct MemoryModel {
    n_log2: u32,
    p: usize,
    scheme: QuantScheme,
}

impl MemoryModel {
    pub fn new(n_log2: u32, p: usize, scheme: QuantScheme) -> Self {
        Self { n_log2, p, scheme }
    }

    pub fn n(&self) -> usize {
        1usize << self.n_log2
    }

    pub fn p(&self) -> usize {
        self.p
    }

    // -- channel memory: 2 banks x (N/(2P)) words x (P*Qc) bits -------------

    pub fn channel_words_per_bank(&self) -> usize {
        self.n() / (2 * self.p)
    }

    pub fn channel_word_bits(&self) -> u64 {
        self.p as u64 * self.scheme.qc() as u64
    }

    pub fn channel_bits(&self) -> u64 {
        self.scheme.qc() as u64 * self.n() as u64
    }

    // -- internal memory: per stage l, max(2^l, P) LLR slots at Q bits ------

    pub fn internal_slots(&self, stage: u32) -> usize {
        (1usize << stage).max(self.p)
    }

    pub fn internal_words(&self, stage: u32) -> usize {
        self.internal_slots(stage) / self.p
    }

    pub fn internal_word_bits(&self) -> u64 {
        self.p as u64 * self.scheme.q() as u64
    }

    /// Total internal bits; equals `Q * (N + P*log2(P) - P)`.
    pub fn internal_bits(&self) -> u64 {
        let slots: u64 = (0..self.n_log2).map(|l| self.internal_slots(l) as u64).sum();
        self.scheme.q() as u64 * slots
    }

    /// Combined channel + internal LLR storage.
    pub fn llr_bits(&self) -> u64 {
        self.channel_bits() + self.internal_bits()
    }

    // -- partial-sum memory: stages m in [1, n-1] ---------------------------

    /// Number of buffered generations for a partial-sum stage: ping-pong
    /// everywhere except the single-use top stage.
    pub fn psum_generations(&self, stage: u32) -> usize {
        if stage == self.n_log2 - 1 {
            1
        } else {
            2
        }
    }

    /// Bits per generation of a partial-sum stage.
    pub fn psum_slots(&self, stage: u32) -> usize {
        (1usize << stage).max(self.p)
    }

    pub fn psum_words(&self, stage: u32) -> usize {
        self.psum_slots(stage) / self.p
    }

    /// Total partial-sum bits; equals `P * (3N/(2P) + 2*log2(P) - 4)`.
    pub fn psum_bits(&self) -> u64 {
        (1..self.n_log2)
            .map(|m| (self.psum_generations(m) * self.psum_slots(m)) as u64)
            .sum()
    }

    // -- frozen-bit ROM ------------------------------------------------------

    pub fn rom_bits(&self) -> u64 {
        self.n() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llr::QuantScheme;

    fn model(n: u32, p: usize, qi: u8, qic: u8, qf: u8) -> MemoryModel {
        MemoryModel::new(n, p, QuantScheme::new(qi, qic, qf).unwrap())
    }

    #[test]
    fn closed_forms_match_geometry() {
        for n in 3..=16u32 {
            let nn = 1u64 << n;
            for p_log in 1..=6u32 {
                let p = 1usize << p_log;
                if p as u64 > nn / 4 {
                    continue;
                }
                let m = model(n, p, 6, 3, 2);
                let q = 8u64;
                let qc = 5u64;
                assert_eq!(m.channel_bits(), qc * nn);
                assert_eq!(
                    m.internal_bits(),
                    q * (nn + p as u64 * p_log as u64 - p as u64),
                    "internal bits n={n} p={p}"
                );
                assert_eq!(
                    m.psum_bits(),
                    p as u64 * (3 * nn / (2 * p as u64) + 2 * p_log as u64 - 4),
                    "psum bits n={n} p={p}"
                );
                assert_eq!(m.rom_bits(), nn);
                assert_eq!(
                    m.channel_words_per_bank() as u64 * 2 * m.channel_word_bits(),
                    m.channel_bits()
                );
            }
        }
    }

    #[test]
    fn paper_sized_examples() {
        let m = model(15, 64, 3, 3, 2); // Q = Qc = 5
        assert_eq!(m.llr_bits(), 329_280);
        assert_eq!(m.psum_bits(), 49_664);
        let m = model(15, 64, 6, 3, 2); // Q = 8, Qc = 5
        assert_eq!(m.llr_bits(), 428_544);
        let m = model(3, 2, 6, 3, 2);
        assert_eq!(m.psum_bits(), 8);
        assert_eq!(m.rom_bits(), 8);
    }
}
