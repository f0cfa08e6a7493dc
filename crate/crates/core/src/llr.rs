//! LLR node functions and saturating fixed-point arithmetic.
//!
//! The decoder works on log-likelihood ratios (positive favors bit 0). Two
//! node functions drive the SC recursion: `f` (check node, exact sum-product
//! form or its min-sum approximation) and `g` (variable node with a partial
//! sum). Fixed-point values use the `(Qi, Qic, Qf)` scheme: `Qi` integer bits
//! for internal LLRs, `Qic` for channel LLRs, `Qf` fractional bits shared by
//! both, with symmetric saturation so that negation can never overflow and
//! min-sum stays exact in sign-magnitude terms.

use crate::{Error, Result};
use std::fmt;

/// `(Qi, Qic, Qf)` quantization scheme; `Q = Qi + Qf`, `Qc = Qic + Qf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantScheme {
    qi: u8,
    qic: u8,
    qf: u8,
}

impl QuantScheme {
    pub fn new(qi: u8, qic: u8, qf: u8) -> Result<Self> {
        if qi < 1 || qic < 1 {
            return Err(Error::InvalidParameter(
                "Qi and Qic must both be at least 1".into(),
            ));
        }
        if qic > qi {
            return Err(Error::InvalidParameter(format!(
                "channel words must sign-extend into internal words (Qic={qic} > Qi={qi})"
            )));
        }
        if qi + qf > 16 {
            return Err(Error::InvalidParameter(format!(
                "total internal width Q={} exceeds 16 bits",
                qi + qf
            )));
        }
        Ok(Self { qi, qic, qf })
    }

    pub fn qi(&self) -> u8 {
        self.qi
    }

    pub fn qic(&self) -> u8 {
        self.qic
    }

    pub fn qf(&self) -> u8 {
        self.qf
    }

    /// Total internal width `Q = Qi + Qf` (including sign).
    pub fn q(&self) -> u8 {
        self.qi + self.qf
    }

    /// Total channel width `Qc = Qic + Qf` (including sign).
    pub fn qc(&self) -> u8 {
        self.qic + self.qf
    }

    /// Largest internal raw magnitude, `2^(Q-1) - 1`.
    pub fn max_raw_internal(&self) -> i32 {
        max_raw(self.q())
    }

    /// Largest channel raw magnitude, `2^(Qc-1) - 1`.
    pub fn max_raw_channel(&self) -> i32 {
        max_raw(self.qc())
    }

    /// Size of one fractional step, `2^-Qf`.
    pub fn step(&self) -> f64 {
        1.0 / (1u32 << self.qf) as f64
    }
}

impl fmt::Display for QuantScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.qi, self.qic, self.qf)
    }
}

/// Symmetric saturation bound for a signed width: `2^(bits-1) - 1`.
#[inline]
pub(crate) fn max_raw(bits: u8) -> i32 {
    (1i32 << (bits - 1)) - 1
}

/// A saturating fixed-point LLR: `raw` in units of `2^-Qf`, `bits` total
/// width including sign. `-2^(bits-1)` never occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxLLR {
    raw: i32,
    bits: u8,
}

impl FxLLR {
    /// Wraps a raw value, saturating it into the symmetric range of `bits`.
    pub fn new(raw: i32, bits: u8) -> Self {
        let sat = max_raw(bits);
        Self {
            raw: raw.clamp(-sat, sat),
            bits,
        }
    }

    pub fn raw(&self) -> i32 {
        self.raw
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    /// Real value under `Qf` fractional bits.
    pub fn value(&self, qf: u8) -> f64 {
        self.raw as f64 / (1u32 << qf) as f64
    }
}

// ---------------------------------------------------------------------------
// Floating-point node functions
// ---------------------------------------------------------------------------

/// Min-sum check node: `sign(a)·sign(b)·min(|a|,|b|)` with `sign(0) = +1`.
#[inline]
pub fn f_minsum(a: f64, b: f64) -> f64 {
    let mag = a.abs().min(b.abs());
    if mag == 0.0 {
        return 0.0;
    }
    if (a < 0.0) ^ (b < 0.0) {
        -mag
    } else {
        mag
    }
}

/// Exact sum-product check node `2·atanh(tanh(a/2)·tanh(b/2))`, with the
/// atanh argument clamped below 1 so saturated operands stay finite.
#[inline]
pub fn f_spa(a: f64, b: f64) -> f64 {
    const LIMIT: f64 = 1.0 - 1e-12;
    let t = ((a / 2.0).tanh() * (b / 2.0).tanh()).clamp(-LIMIT, LIMIT);
    2.0 * t.atanh()
}

/// Variable node: `a·(-1)^s + b` for partial sum `s`.
#[inline]
pub fn g_llr(s: u8, a: f64, b: f64) -> f64 {
    debug_assert!(s <= 1);
    if s == 0 {
        a + b
    } else {
        b - a
    }
}

/// Hard decision: 0 for non-negative LLRs (so a 0 LLR decodes to bit 0).
#[inline]
pub fn hard_decision(a: f64) -> u8 {
    if a >= 0.0 {
        0
    } else {
        1
    }
}

// ---------------------------------------------------------------------------
// Fixed-point node functions
// ---------------------------------------------------------------------------

#[inline]
pub(crate) fn f_minsum_raw(a: i32, b: i32) -> i32 {
    let mag = a.abs().min(b.abs());
    if (a < 0) ^ (b < 0) {
        -mag
    } else {
        mag
    }
}

#[inline]
pub(crate) fn g_raw(s: u8, a: i32, b: i32, sat: i32) -> i32 {
    let t = if s == 0 { a + b } else { b - a };
    t.clamp(-sat, sat)
}

#[inline]
pub(crate) fn hard_decision_raw(a: i32) -> u8 {
    if a >= 0 {
        0
    } else {
        1
    }
}

/// Fixed-point min-sum check node. Never overflows: the result magnitude is
/// bounded by both operand magnitudes.
pub fn f_minsum_fx(a: FxLLR, b: FxLLR) -> Result<FxLLR> {
    if a.bits != b.bits {
        return Err(Error::FormatMismatch(a.bits, b.bits));
    }
    Ok(FxLLR {
        raw: f_minsum_raw(a.raw, b.raw),
        bits: a.bits,
    })
}

/// Fixed-point variable node, saturating symmetrically to `±(2^(bits-1)-1)`.
pub fn g_fx(s: u8, a: FxLLR, b: FxLLR) -> Result<FxLLR> {
    if a.bits != b.bits {
        return Err(Error::FormatMismatch(a.bits, b.bits));
    }
    if s > 1 {
        return Err(Error::InvalidParameter(format!(
            "partial sum must be a bit, got {s}"
        )));
    }
    Ok(FxLLR {
        raw: g_raw(s, a.raw, b.raw, max_raw(a.bits)),
        bits: a.bits,
    })
}

pub fn hard_decision_fx(a: FxLLR) -> u8 {
    hard_decision_raw(a.raw)
}

/// Quantizes a channel LLR to `Qc` bits: round to the nearest multiple of
/// `2^-Qf` (ties away from zero), then saturate symmetrically.
pub fn quantize_channel(y_llr: f64, scheme: &QuantScheme) -> Result<FxLLR> {
    if y_llr.is_nan() {
        return Err(Error::InvalidParameter("channel LLR is NaN".into()));
    }
    let sat = max_raw(scheme.qc()) as f64;
    let scaled = (y_llr * (1u32 << scheme.qf()) as f64).round();
    Ok(FxLLR {
        raw: scaled.clamp(-sat, sat) as i32,
        bits: scheme.qc(),
    })
}

/// Widens a channel-format value to the internal format; the represented
/// value is unchanged (both formats share `Qf`).
pub fn sign_extend(x: FxLLR, scheme: &QuantScheme) -> FxLLR {
    debug_assert_eq!(x.bits, scheme.qc());
    FxLLR {
        raw: x.raw,
        bits: scheme.q(),
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn llr() -> impl Strategy<Value = f64> {
        prop_oneof![(-50.0..50.0f64), (-0.5..0.5f64), Just(0.0)]
    }

    proptest! {
        #[test]
        fn check_nodes_commute_and_bound(a in llr(), b in llr()) {
            prop_assert_eq!(f_minsum(a, b), f_minsum(b, a));
            prop_assert!((f_spa(a, b) - f_spa(b, a)).abs() < 1e-12);
            // The magnitude bound is exact in real arithmetic; tanh saturation
            // amplifies last-ulp rounding once operands pass ~20, hence the slack.
            prop_assert!(f_spa(a, b).abs() <= a.abs().min(b.abs()) + 1e-3);
            prop_assert_eq!(f_minsum(a, b).abs(), a.abs().min(b.abs()));
            if a != 0.0 && b != 0.0 {
                prop_assert_eq!(f_spa(a, b) >= 0.0, f_minsum(a, b) >= 0.0);
            }
        }

        #[test]
        fn g_halves_sum_to_twice_b(a in llr(), b in llr()) {
            let sum = g_llr(0, a, b) + g_llr(1, a, b);
            prop_assert!((sum - 2.0 * b).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()));
        }

        #[test]
        fn fixed_g_is_exact_or_saturated(bits in 2u8..=16, a in any::<i16>(), b in any::<i16>(), s in 0u8..=1) {
            let sat = max_raw(bits);
            let a = FxLLR::new((a as i32) % (sat + 1), bits);
            let b = FxLLR::new((b as i32) % (sat + 1), bits);
            let exact = if s == 0 { a.raw() + b.raw() } else { b.raw() - a.raw() };
            let got = g_fx(s, a, b).unwrap().raw();
            if exact.abs() <= sat {
                prop_assert_eq!(got, exact);
            } else {
                prop_assert_eq!(got, if exact > 0 { sat } else { -sat });
            }
        }

        #[test]
        fn quantizer_is_odd(y in -1e4..1e4f64, qi in 1u8..=8, qf in 0u8..=6) {
            let s = QuantScheme::new(qi.max(2), qi.max(2).min(4), qf).unwrap();
            let pos = quantize_channel(y, &s).unwrap();
            let neg = quantize_channel(-y, &s).unwrap();
            prop_assert_eq!(pos.raw(), -neg.raw());
        }

        #[test]
        fn fixed_minsum_never_grows(bits in 2u8..=16, a in any::<i16>(), b in any::<i16>()) {
            let sat = max_raw(bits);
            let a = FxLLR::new((a as i32).clamp(-sat, sat), bits);
            let b = FxLLR::new((b as i32).clamp(-sat, sat), bits);
            let r = f_minsum_fx(a, b).unwrap();
            prop_assert!(r.raw().abs() <= a.raw().abs().max(b.raw().abs()));
            prop_assert_eq!(r.raw().abs(), a.raw().abs().min(b.raw().abs()));
        }
    }
}
