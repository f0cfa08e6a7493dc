//! Golden-model recursive SC decoders.
//!
//! These decoders are the reference the architecture simulator is checked
//! against: an `O(N log N)` recursion over per-stage buffers that visits
//! leaves in ascending index order. Three arithmetic variants share the same
//! traversal — float sum-product, float min-sum, and fixed-point min-sum in
//! the internal `Q` format (channel values enter in `Qc` and sign-extend on
//! first use).

use crate::code::PolarCode;
use crate::llr::{
    self, f_minsum_raw, g_raw, hard_decision_raw, FxLLR, QuantScheme,
};
use crate::{Error, Result};

/// Decoding algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeAlgo {
    /// Floating point with the exact sum-product check node.
    SpaFloat,
    /// Floating point with the min-sum check node.
    MsaFloat,
    /// Fixed-point min-sum under a quantization scheme.
    MsaFixed(QuantScheme),
}

trait ScArith {
    type Llr: Copy + Default;
    fn f(&self, a: Self::Llr, b: Self::Llr) -> Self::Llr;
    fn g(&self, s: u8, a: Self::Llr, b: Self::Llr) -> Self::Llr;
    fn hard(&self, a: Self::Llr) -> u8;
}

struct SpaOps;
struct MsaOps;
struct FixedOps {
    sat: i32,
}

impl ScArith for SpaOps {
    type Llr = f64;
    #[inline]
    fn f(&self, a: f64, b: f64) -> f64 {
        llr::f_spa(a, b)
    }
    #[inline]
    fn g(&self, s: u8, a: f64, b: f64) -> f64 {
        llr::g_llr(s, a, b)
    }
    #[inline]
    fn hard(&self, a: f64) -> u8 {
        llr::hard_decision(a)
    }
}

impl ScArith for MsaOps {
    type Llr = f64;
    #[inline]
    fn f(&self, a: f64, b: f64) -> f64 {
        llr::f_minsum(a, b)
    }
    #[inline]
    fn g(&self, s: u8, a: f64, b: f64) -> f64 {
        llr::g_llr(s, a, b)
    }
    #[inline]
    fn hard(&self, a: f64) -> u8 {
        llr::hard_decision(a)
    }
}

impl ScArith for FixedOps {
    type Llr = i32;
    #[inline]
    fn f(&self, a: i32, b: i32) -> i32 {
        f_minsum_raw(a, b)
    }
    #[inline]
    fn g(&self, s: u8, a: i32, b: i32) -> i32 {
        g_raw(s, a, b, self.sat)
    }
    #[inline]
    fn hard(&self, a: i32) -> u8 {
        hard_decision_raw(a)
    }
}

/// Per-level scratch: LLR buffers plus two partial-sum buffers per level
/// (subtree re-encode and saved left-sibling re-encode).
struct Workspace<T> {
    llr: Vec<Vec<T>>,
    ps: Vec<Vec<u8>>,
    ps_left: Vec<Vec<u8>>,
}

impl<T: Copy + Default> Workspace<T> {
    fn new() -> Self {
        Self {
            llr: Vec::new(),
            ps: Vec::new(),
            ps_left: Vec::new(),
        }
    }

    fn ensure(&mut self, n: u32) {
        let levels = n as usize + 1;
        if self.llr.len() < levels {
            self.llr = (0..levels).map(|l| vec![T::default(); 1 << l]).collect();
            self.ps = (0..levels).map(|l| vec![0u8; 1 << l]).collect();
            self.ps_left = (0..levels).map(|l| vec![0u8; 1 << l]).collect();
        }
    }
}

fn sc_recurse<O: ScArith>(
    ops: &O,
    code: &PolarCode,
    ws: &mut Workspace<O::Llr>,
    level: usize,
    base: usize,
    u_hat: &mut [u8],
) {
    if level == 0 {
        let bit = if code.is_frozen(base) {
            0
        } else {
            ops.hard(ws.llr[0][0])
        };
        u_hat[base] = bit;
        ws.ps[0][0] = bit;
        return;
    }
    let half = 1usize << (level - 1);

    // f pass feeds the left subtree.
    {
        let (lo, hi) = ws.llr.split_at_mut(level);
        for i in 0..half {
            lo[level - 1][i] = ops.f(hi[0][i], hi[0][i + half]);
        }
    }
    sc_recurse(ops, code, ws, level - 1, base, u_hat);

    // Stash the left re-encode; it is the partial sum consumed by g. The
    // recursions below only touch ps_left at strictly lower levels.
    ws.ps_left[level - 1].copy_from_slice(&ws.ps[level - 1]);
    {
        let (lo, hi) = ws.llr.split_at_mut(level);
        let left = &ws.ps_left[level - 1];
        for i in 0..half {
            lo[level - 1][i] = ops.g(left[i], hi[0][i], hi[0][i + half]);
        }
    }
    sc_recurse(ops, code, ws, level - 1, base + half, u_hat);

    // Combine child re-encodes: x = (left ^ right, right).
    let (lo, hi) = ws.ps.split_at_mut(level);
    let left = &ws.ps_left[level - 1];
    for i in 0..half {
        hi[0][i] = left[i] ^ lo[level - 1][i];
        hi[0][i + half] = lo[level - 1][i];
    }
}

/// A reusable SC decoder instance. Holds scratch buffers, so one instance
/// decodes one frame at a time; spin up one instance per worker.
pub struct ScDecoder {
    algo: DecodeAlgo,
    float_ws: Workspace<f64>,
    fixed_ws: Workspace<i32>,
}

impl ScDecoder {
    pub fn new(algo: DecodeAlgo) -> Self {
        Self {
            algo,
            float_ws: Workspace::new(),
            fixed_ws: Workspace::new(),
        }
    }

    pub fn algo(&self) -> DecodeAlgo {
        self.algo
    }

    /// Decodes a frame of channel LLRs, returning the length-`N` estimate
    /// (frozen positions are 0). For [`DecodeAlgo::MsaFixed`] the inputs are
    /// channel-quantized first, exactly as the hardware front end would.
    pub fn decode(&mut self, code: &PolarCode, channel_llrs: &[f64]) -> Result<Vec<u8>> {
        if channel_llrs.len() != code.len() {
            return Err(Error::LengthMismatch {
                expected: code.len(),
                got: channel_llrs.len(),
            });
        }
        match self.algo {
            DecodeAlgo::SpaFloat => self.decode_float(code, channel_llrs, &SpaOps),
            DecodeAlgo::MsaFloat => self.decode_float(code, channel_llrs, &MsaOps),
            DecodeAlgo::MsaFixed(scheme) => {
                let quantized: Vec<FxLLR> = channel_llrs
                    .iter()
                    .map(|&y| llr::quantize_channel(y, &scheme))
                    .collect::<Result<_>>()?;
                self.decode_quantized(code, &quantized)
            }
        }
    }

    /// Fixed-point decode of already channel-quantized inputs.
    ///
    /// Only meaningful for [`DecodeAlgo::MsaFixed`]; the values are widened to
    /// the internal `Q` format on first use and every internal operation
    /// saturates at `±(2^(Q-1)-1)`.
    pub fn decode_quantized(&mut self, code: &PolarCode, channel: &[FxLLR]) -> Result<Vec<u8>> {
        let scheme = match self.algo {
            DecodeAlgo::MsaFixed(s) => s,
            _ => {
                return Err(Error::InvalidParameter(
                    "decode_quantized requires the fixed-point algorithm".into(),
                ))
            }
        };
        if channel.len() != code.len() {
            return Err(Error::LengthMismatch {
                expected: code.len(),
                got: channel.len(),
            });
        }
        for v in channel {
            if v.bits() != scheme.qc() {
                return Err(Error::FormatMismatch(v.bits(), scheme.qc()));
            }
        }
        let n = code.n_log2();
        self.fixed_ws.ensure(n);
        let top = n as usize;
        for (dst, src) in self.fixed_ws.llr[top].iter_mut().zip(channel) {
            *dst = src.raw(); // sign extension preserves the raw value
        }
        let ops = FixedOps {
            sat: scheme.max_raw_internal(),
        };
        let mut u_hat = vec![0u8; code.len()];
        sc_recurse(&ops, code, &mut self.fixed_ws, top, 0, &mut u_hat);
        Ok(u_hat)
    }

    fn decode_float<O: ScArith<Llr = f64>>(
        &mut self,
        code: &PolarCode,
        channel_llrs: &[f64],
        ops: &O,
    ) -> Result<Vec<u8>> {
        let n = code.n_log2();
        self.float_ws.ensure(n);
        let top = n as usize;
        self.float_ws.llr[top].copy_from_slice(channel_llrs);
        let mut u_hat = vec![0u8; code.len()];
        sc_recurse(ops, code, &mut self.float_ws, top, 0, &mut u_hat);
        Ok(u_hat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llr::quantize_channel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn all_algos() -> Vec<DecodeAlgo> {
        vec![
            DecodeAlgo::SpaFloat,
            DecodeAlgo::MsaFloat,
            DecodeAlgo::MsaFixed(QuantScheme::new(6, 3, 2).unwrap()),
        ]
    }

    #[test]
    fn noiseless_all_zero_decodes_to_zero() {
        let code = PolarCode::construct(4, 9, 0.5).unwrap();
        let llrs = vec![4.0; 16];
        for algo in all_algos() {
            let mut dec = ScDecoder::new(algo);
            let u_hat = dec.decode(&code, &llrs).unwrap();
            assert_eq!(u_hat, vec![0u8; 16]);
        }
    }

    #[test]
    fn two_bit_hand_trace() {
        // f(-1,3) = -1 -> u0 = 1; g(1,-1,3) = 4 -> u1 = 0.
        let code = PolarCode::construct(1, 2, 0.5).unwrap();
        let mut dec = ScDecoder::new(DecodeAlgo::MsaFloat);
        assert_eq!(dec.decode(&code, &[-1.0, 3.0]).unwrap(), vec![1, 0]);
    }

    #[test]
    fn n8_k4_exhaustive_round_trip() {
        let code = PolarCode::construct(3, 4, 0.5).unwrap();
        for algo in all_algos() {
            let mut dec = ScDecoder::new(algo);
            for msg in 0..16u8 {
                let info: Vec<u8> = (0..4).map(|i| (msg >> i) & 1).collect();
                let x = code.encode(&info).unwrap();
                let llrs: Vec<f64> = x.iter().map(|&b| if b == 0 { 3.5 } else { -3.5 }).collect();
                let u_hat = dec.decode(&code, &llrs).unwrap();
                assert_eq!(code.extract_info(&u_hat).unwrap(), info, "algo {algo:?} msg {msg}");
            }
        }
    }

    #[test]
    fn frozen_positions_are_always_zero() {
        let code = PolarCode::construct(6, 20, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for algo in all_algos() {
            let mut dec = ScDecoder::new(algo);
            for _ in 0..50 {
                let llrs: Vec<f64> = (0..64).map(|_| rng.gen_range(-6.0..6.0)).collect();
                let u_hat = dec.decode(&code, &llrs).unwrap();
                for i in 0..64 {
                    if code.is_frozen(i) {
                        assert_eq!(u_hat[i], 0);
                    }
                }
            }
        }
    }

    #[test]
    fn msa_float_is_scale_invariant() {
        let code = PolarCode::construct(7, 64, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut dec = ScDecoder::new(DecodeAlgo::MsaFloat);
        for _ in 0..25 {
            let llrs: Vec<f64> = (0..128).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let base = dec.decode(&code, &llrs).unwrap();
            for gamma in [0.125, 3.0, 417.0] {
                let scaled: Vec<f64> = llrs.iter().map(|&v| v * gamma).collect();
                assert_eq!(dec.decode(&code, &scaled).unwrap(), base);
            }
        }
    }

    #[test]
    fn decode_quantized_matches_decode_on_prequantized_input() {
        let scheme = QuantScheme::new(6, 3, 2).unwrap();
        let code = PolarCode::construct(5, 16, 0.5).unwrap();
        let mut dec = ScDecoder::new(DecodeAlgo::MsaFixed(scheme));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let llrs: Vec<f64> = (0..32).map(|_| rng.gen_range(-8.0..8.0)).collect();
            let q: Vec<FxLLR> = llrs.iter().map(|&y| quantize_channel(y, &scheme).unwrap()).collect();
            assert_eq!(
                dec.decode(&code, &llrs).unwrap(),
                dec.decode_quantized(&code, &q).unwrap()
            );
        }
    }

    /// High-precision fixed point should almost always agree with float MSA.
    /// The widest scheme the 16-bit cap allows is used here.
    #[test]
    fn fixed_point_fidelity_smoke() {
        let scheme = QuantScheme::new(12, 12, 4).unwrap();
        let code = PolarCode::construct(10, 512, 0.5).unwrap();
        let n = code.len();
        let sigma2 = 1.0 / (2.0 * code.rate() * 10f64.powf(3.0 / 10.0));
        let sigma = sigma2.sqrt();

        let mut float_dec = ScDecoder::new(DecodeAlgo::MsaFloat);
        let mut fixed_dec = ScDecoder::new(DecodeAlgo::MsaFixed(scheme));
        let mut agree = 0u32;
        let frames = 1000;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..frames {
            let info: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..2u8)).collect();
            let x = code.encode(&info).unwrap();
            let llrs: Vec<f64> = (0..n)
                .map(|i| {
                    let s = 1.0 - 2.0 * x[i] as f64;
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    2.0 * (s + sigma * noise) / sigma2
                })
                .collect();
            if float_dec.decode(&code, &llrs).unwrap() == fixed_dec.decode(&code, &llrs).unwrap() {
                agree += 1;
            }
        }
        assert!(
            agree as f64 / frames as f64 >= 0.999,
            "fixed/float agreement {agree}/{frames}"
        );
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let code = PolarCode::construct(3, 4, 0.5).unwrap();
        let mut dec = ScDecoder::new(DecodeAlgo::MsaFloat);
        assert!(dec.decode(&code, &[0.0; 7]).is_err());
    }
}
