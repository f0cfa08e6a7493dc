//! Polar code construction, non-systematic encoding and frozen-set management.
//!
//! A [`PolarCode`] is entirely described by its length `N = 2^n` and a frozen
//! mask in decoding order; the mask is what the hardware keeps in its ROM, so
//! changing the code never changes the datapath. Construction uses the
//! Bhattacharyya-parameter recursion `z -> {2z - z^2, z^2}` over an erasure
//! prior, and masks can also be loaded from a small text format so that
//! externally constructed codes are usable as-is.

use crate::{Error, Result};

/// Maximum supported `log2(N)`.
pub const MAX_N_LOG2: u32 = 20;

/// A polar code: length, frozen mask (decoding order) and derived rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarCode {
    n: u32,
    k: usize,
    frozen: Vec<bool>,
}

impl PolarCode {
    /// Builds the code that freezes the `N - K` least reliable synthetic
    /// channels under the Bhattacharyya recursion with erasure prior
    /// `design_param` (ties freeze the lower index).
    pub fn construct(n: u32, k: usize, design_param: f64) -> Result<Self> {
        if n < 1 || n > MAX_N_LOG2 {
            return Err(Error::InvalidParameter(format!(
                "n must be in [1, {MAX_N_LOG2}], got {n}"
            )));
        }
        let len = 1usize << n;
        if k == 0 || k > len {
            return Err(Error::InvalidParameter(format!(
                "K must be in [1, {len}], got {k}"
            )));
        }
        if !(design_param > 0.0 && design_param < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "design parameter must lie in (0, 1), got {design_param}"
            )));
        }

        let z = bhattacharyya_parameters(n, design_param);
        // Rank channels worst-first; equal reliabilities freeze the lower index.
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&a, &b| z[b].partial_cmp(&z[a]).unwrap().then(a.cmp(&b)));

        let mut frozen = vec![false; len];
        for &idx in order.iter().take(len - k) {
            frozen[idx] = true;
        }
        Ok(Self { n, k, frozen })
    }

    /// Wraps an externally supplied frozen mask (decoding order,
    /// `true` = frozen). `K` is derived from the mask; all-frozen masks are
    /// accepted so that rate-0 diagnostic codes can be simulated.
    pub fn from_frozen_mask(frozen: Vec<bool>) -> Result<Self> {
        let len = frozen.len();
        if !len.is_power_of_two() || len < 2 || len > (1 << MAX_N_LOG2) {
            return Err(Error::InvalidParameter(format!(
                "mask length must be a power of two in [2, 2^{MAX_N_LOG2}], got {len}"
            )));
        }
        let n = len.trailing_zeros();
        let k = frozen.iter().filter(|&&f| !f).count();
        Ok(Self { n, k, frozen })
    }

    /// `log2(N)`.
    pub fn n_log2(&self) -> u32 {
        self.n
    }

    /// Code length `N`.
    pub fn len(&self) -> usize {
        self.frozen.len()
    }

    /// Never empty; `N >= 2`.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of information bits `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Code rate `K / N`.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.len() as f64
    }

    /// Frozen mask in decoding order.
    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    /// Expands `K` information bits to a length-`N` vector in decoding order,
    /// with zeros at frozen positions.
    pub fn expand_info(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: info.len(),
            });
        }
        let mut u = vec![0u8; self.len()];
        let mut next = 0;
        for (i, slot) in u.iter_mut().enumerate() {
            if !self.frozen[i] {
                *slot = info[next] & 1;
                next += 1;
            }
        }
        Ok(u)
    }

    /// Selects the unfrozen positions of a length-`N` estimate, inverse of
    /// [`PolarCode::expand_info`].
    pub fn extract_info(&self, u_hat: &[u8]) -> Result<Vec<u8>> {
        if u_hat.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: u_hat.len(),
            });
        }
        Ok(u_hat
            .iter()
            .zip(&self.frozen)
            .filter(|(_, &f)| !f)
            .map(|(&b, _)| b)
            .collect())
    }

    /// Non-systematic encode: `x = u_expanded * F_N` over GF(2), natural
    /// (non-bit-reversed) output order.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        let mut x = self.expand_info(info)?;
        butterfly_transform(&mut x);
        Ok(x)
    }

    /// Serializes the frozen mask to the two-line text format.
    pub fn save_frozen_mask(&self) -> String {
        let len = self.len();
        let digits = (len + 3) / 4;
        let mut hex = String::with_capacity(digits);
        for d in 0..digits {
            let mut nibble = 0u8;
            for b in 0..4 {
                let idx = 4 * d + b;
                // MSB of the hex string is mask index 0.
                if idx < len && self.frozen[idx] {
                    nibble |= 1 << (3 - b);
                }
            }
            hex.push(char::from_digit(nibble as u32, 16).unwrap().to_ascii_uppercase());
        }
        format!("n={} K={}\n{}\n", self.n, self.k, hex)
    }

    /// Parses the two-line frozen-mask format and validates the declared `K`
    /// against the mask's population count.
    pub fn load_frozen_mask(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MaskFormat("missing header line".into()))?;
        let mut n_decl: Option<u32> = None;
        let mut k_decl: Option<usize> = None;
        for field in header.split_whitespace() {
            if let Some(v) = field.strip_prefix("n=") {
                n_decl = Some(v.parse().map_err(|_| {
                    Error::MaskFormat(format!("bad n field `{field}`"))
                })?);
            } else if let Some(v) = field.strip_prefix("K=") {
                k_decl = Some(v.parse().map_err(|_| {
                    Error::MaskFormat(format!("bad K field `{field}`"))
                })?);
            } else {
                return Err(Error::MaskFormat(format!("unexpected field `{field}`")));
            }
        }
        let n = n_decl.ok_or_else(|| Error::MaskFormat("missing n= field".into()))?;
        let k = k_decl.ok_or_else(|| Error::MaskFormat("missing K= field".into()))?;
        if n < 1 || n > MAX_N_LOG2 {
            return Err(Error::MaskFormat(format!("n={n} out of range")));
        }
        let len = 1usize << n;

        let hex = lines
            .next()
            .ok_or_else(|| Error::MaskFormat("missing mask line".into()))?
            .trim();
        let digits = (len + 3) / 4;
        if hex.len() != digits {
            return Err(Error::MaskFormat(format!(
                "expected {digits} hex digits for N={len}, got {}",
                hex.len()
            )));
        }
        let mut frozen = vec![false; len];
        for (d, ch) in hex.chars().enumerate() {
            let nibble = ch
                .to_digit(16)
                .ok_or_else(|| Error::MaskFormat(format!("bad hex digit `{ch}`")))? as u8;
            for b in 0..4 {
                let idx = 4 * d + b;
                let set = nibble & (1 << (3 - b)) != 0;
                if idx < len {
                    frozen[idx] = set;
                } else if set {
                    return Err(Error::MaskFormat("padding bits must be zero".into()));
                }
            }
        }
        let code = Self::from_frozen_mask(frozen)?;
        if code.k != k {
            return Err(Error::MaskFormat(format!(
                "declared K={k} but mask has {} information bits",
                code.k
            )));
        }
        Ok(code)
    }
}

/// Per-channel Bhattacharyya parameters after `n` polarization levels,
/// indexed in decoding order.
fn bhattacharyya_parameters(n: u32, prior: f64) -> Vec<f64> {
    let mut z = vec![prior];
    for _ in 0..n {
        let mut next = Vec::with_capacity(z.len() * 2);
        for &v in &z {
            next.push(2.0 * v - v * v); // minus (worse) channel
            next.push(v * v); // plus (better) channel
        }
        z = next;
    }
    z
}

/// Reverses the `n`-bit binary expansion of `j`.
pub fn bit_reverse(j: usize, n: u32) -> Result<usize> {
    if n > MAX_N_LOG2 || j >= (1usize << n) {
        return Err(Error::InvalidParameter(format!(
            "bit_reverse: j={j} out of range for n={n}"
        )));
    }
    Ok(bit_reverse_unchecked(j, n))
}

#[inline]
pub(crate) fn bit_reverse_unchecked(j: usize, n: u32) -> usize {
    let mut out = 0usize;
    for b in 0..n {
        out |= ((j >> b) & 1) << (n - 1 - b);
    }
    out
}

/// In-place GF(2) butterfly computing `x = x * F_N`, `F_N = F_2 ⊗ ... ⊗ F_2`.
///
/// The per-distance butterfly passes commute, so the stage order is free;
/// strides ascend here.
pub fn butterfly_transform(x: &mut [u8]) {
    debug_assert!(x.len().is_power_of_two());
    let len = x.len();
    let mut stride = 1;
    while stride < len {
        let block = stride << 1;
        for start in (0..len).step_by(block) {
            for i in start..start + stride {
                x[i] ^= x[i + stride];
            }
        }
        stride = block;
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn encode_is_gf2_linear(n in 1u32..=6, seed_a in any::<u64>(), seed_b in any::<u64>()) {
            let len = 1usize << n;
            let bits = |seed: u64| -> Vec<u8> {
                (0..len).map(|i| ((seed >> (i % 64)) & 1) as u8).collect()
            };
            let (a, b) = (bits(seed_a), bits(seed_b));
            let xor: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();

            let enc = |v: &[u8]| { let mut x = v.to_vec(); butterfly_transform(&mut x); x };
            let lhs = enc(&xor);
            let rhs: Vec<u8> = enc(&a).iter().zip(enc(&b)).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn bit_reverse_is_an_involution(n in 1u32..=16, j in any::<usize>()) {
            let j = j & ((1usize << n) - 1);
            prop_assert_eq!(bit_reverse(bit_reverse(j, n).unwrap(), n).unwrap(), j);
        }
    }
}
