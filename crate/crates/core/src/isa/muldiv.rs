//! M-extension arithmetic, structured like the hardware units.
//!
//! The multiplier works on unsigned magnitudes and applies sign correction
//! at the end; a 64x64 product is assembled from four 32x32 partial
//! products. The divider is an iterative restoring divider over a combined
//! remainder/quotient shift register, one trial subtraction per iteration.

use super::alu::sext32;
use super::inst::{DecodedInstruction, Mnemonic};
use crate::config::Xlen;

/// 128-bit value as (high, low) 64-bit words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wide {
    pub hi: u64,
    pub lo: u64,
}

impl Wide {
    fn negate(self) -> Wide {
        let lo = (!self.lo).wrapping_add(1);
        let hi = (!self.hi).wrapping_add((lo == 0) as u64);
        Wide { hi, lo }
    }
}

/// Unsigned 64x64 -> 128 product from four 32x32 partial products.
pub fn mul_u64_partials(a: u64, b: u64) -> Wide {
    let (a_lo, a_hi) = (a & 0xFFFF_FFFF, a >> 32);
    let (b_lo, b_hi) = (b & 0xFFFF_FFFF, b >> 32);

    let ll = a_lo * b_lo;
    let lh = a_lo * b_hi;
    let hl = a_hi * b_lo;
    let hh = a_hi * b_hi;

    // Middle column: upper half of ll plus the low halves of the cross terms.
    let mid = (ll >> 32) + (lh & 0xFFFF_FFFF) + (hl & 0xFFFF_FFFF);
    let lo = (ll & 0xFFFF_FFFF) | (mid << 32);
    let hi = hh + (lh >> 32) + (hl >> 32) + (mid >> 32);
    Wide { hi, lo }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Signedness {
    Signed,
    Unsigned,
}

/// Product of two `bits`-wide operands as a 2*bits-wide (hi, lo) pair.
/// Operands are first reduced to magnitudes, multiplied unsigned, then the
/// product is negated if exactly one operand was negative.
fn mul_wide(a: u64, b: u64, sa: Signedness, sb: Signedness, xlen: Xlen) -> Wide {
    let bits = xlen.bits();
    let neg = |v: u64, s: Signedness| s == Signedness::Signed && (v >> (bits - 1)) & 1 == 1;
    let mag = |v: u64, n: bool| if n { xlen.trunc(v.wrapping_neg()) } else { v };

    let (na, nb) = (neg(a, sa), neg(b, sb));
    let (ma, mb) = (mag(a, na), mag(b, nb));

    let product = match xlen {
        Xlen::X64 => mul_u64_partials(ma, mb),
        Xlen::X32 => {
            // Single 32x32 partial product; split at bit 32.
            let p = ma * mb;
            Wide { hi: p >> 32, lo: p & 0xFFFF_FFFF }
        }
    };
    if na != nb {
        match xlen {
            Xlen::X64 => product.negate(),
            Xlen::X32 => {
                let p = ((product.hi << 32) | product.lo).wrapping_neg();
                Wide { hi: p >> 32, lo: p & 0xFFFF_FFFF }
            }
        }
    } else {
        product
    }
}

/// Multiply-class instructions. `a` and `b` are rs1 and rs2.
pub fn exec_mul(inst: &DecodedInstruction, a: u64, b: u64, xlen: Xlen) -> u64 {
    use Mnemonic::*;
    use Signedness::*;
    match inst.mnemonic {
        MUL => xlen.trunc(mul_wide(a, b, Unsigned, Unsigned, xlen).lo),
        MULH => mul_wide(a, b, Signed, Signed, xlen).hi,
        MULHSU => mul_wide(a, b, Signed, Unsigned, xlen).hi,
        MULHU => mul_wide(a, b, Unsigned, Unsigned, xlen).hi,
        MULW => sext32(mul_wide(a & 0xFFFF_FFFF, b & 0xFFFF_FFFF, Unsigned, Unsigned, Xlen::X32).lo),
        m => unreachable!("{m} is not a multiply"),
    }
}

/// Remainder and quotient halves of the divider's shift register. The
/// remainder half carries one extra bit for the trial subtraction.
#[derive(Clone, Copy, Debug)]
struct RemQuoRegister {
    rem: u128,
    quo: u64,
}

/// Unsigned restoring division of `bits`-wide operands (1..=64).
///
/// Returns `(quotient, remainder)`. Division by zero falls out of the
/// algorithm: every trial subtraction succeeds, so the quotient is all ones
/// and the remainder is the dividend.
pub fn restoring_divide(dividend: u64, divisor: u64, bits: u32) -> (u64, u64) {
    assert!((1..=64).contains(&bits));
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let divisor = (divisor & mask) as u128;
    let mut reg = RemQuoRegister { rem: 0, quo: dividend & mask };
    for _ in 0..bits {
        reg.rem = (reg.rem << 1) | ((reg.quo >> (bits - 1)) & 1) as u128;
        reg.quo = (reg.quo << 1) & mask;
        if reg.rem >= divisor {
            reg.rem -= divisor;
            reg.quo |= 1;
        }
    }
    (reg.quo, reg.rem as u64)
}

/// Signed division on `bits`-wide two's-complement operands, built on the
/// unsigned divider with RISC-V edge semantics.
pub fn restoring_divide_signed(dividend: u64, divisor: u64, bits: u32) -> (u64, u64) {
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let (dividend, divisor) = (dividend & mask, divisor & mask);
    if divisor == 0 {
        return (mask, dividend);
    }
    let neg = |v: u64| (v >> (bits - 1)) & 1 == 1;
    let mag = |v: u64| if neg(v) { v.wrapping_neg() & mask } else { v };
    let (q, r) = restoring_divide(mag(dividend), mag(divisor), bits);
    let q = if neg(dividend) != neg(divisor) { q.wrapping_neg() & mask } else { q };
    let r = if neg(dividend) { r.wrapping_neg() & mask } else { r };
    (q, r)
}

/// Number of divider iterations: 32 for RV32 and W-forms, 64 otherwise.
pub fn div_iterations(inst: &DecodedInstruction, xlen: Xlen) -> u32 {
    if inst.width_suffix {
        32
    } else {
        xlen.bits()
    }
}

/// Divide-class instructions. `a` and `b` are rs1 and rs2.
pub fn exec_div(inst: &DecodedInstruction, a: u64, b: u64, xlen: Xlen) -> u64 {
    use Mnemonic::*;
    let bits = div_iterations(inst, xlen);
    let r = match inst.mnemonic {
        DIV | DIVW => restoring_divide_signed(a, b, bits).0,
        REM | REMW => restoring_divide_signed(a, b, bits).1,
        DIVU | DIVUW => restoring_divide(a, b, bits).0,
        REMU | REMUW => restoring_divide(a, b, bits).1,
        m => unreachable!("{m} is not a divide"),
    };
    if inst.width_suffix {
        sext32(r)
    } else {
        xlen.trunc(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(m: Mnemonic) -> DecodedInstruction {
        DecodedInstruction {
            mnemonic: m,
            rd: 1,
            rs1: 2,
            rs2: 3,
            imm: 0,
            timing_class: m.timing_class(),
            width_suffix: m.is_word_op(),
            raw: 0,
        }
    }

    #[test]
    fn mulh_minus_one_squared() {
        assert_eq!(exec_mul(&inst(Mnemonic::MULH), u64::MAX, u64::MAX, Xlen::X64), 0);
        assert_eq!(exec_mul(&inst(Mnemonic::MULH), 0xFFFF_FFFF, 0xFFFF_FFFF, Xlen::X32), 0);
    }

    #[test]
    fn mulhu_all_ones() {
        // (2^64-1)^2 = 2^128 - 2^65 + 1, high word 2^64 - 2
        assert_eq!(
            exec_mul(&inst(Mnemonic::MULHU), u64::MAX, u64::MAX, Xlen::X64),
            0xFFFF_FFFF_FFFF_FFFE
        );
    }

    #[test]
    fn mulw_ignores_upper_bits() {
        assert_eq!(exec_mul(&inst(Mnemonic::MULW), 0x1_0000_0003, 2, Xlen::X64), 6);
        assert_eq!(
            exec_mul(&inst(Mnemonic::MULW), 0x4000_0000, 2, Xlen::X64),
            0xFFFF_FFFF_8000_0000
        );
    }

    #[test]
    fn mulhsu_mixed_sign() {
        // -1 * (2^64-1) = -(2^64-1); high word is all ones
        assert_eq!(exec_mul(&inst(Mnemonic::MULHSU), u64::MAX, u64::MAX, Xlen::X64), u64::MAX);
        assert_eq!(exec_mul(&inst(Mnemonic::MULHSU), 2, u64::MAX, Xlen::X64), 1);
    }

    #[test]
    fn divide_by_zero_and_overflow() {
        for xlen in [Xlen::X32, Xlen::X64] {
            let min = 1u64 << (xlen.bits() - 1);
            let neg1 = xlen.mask();
            for x in [0u64, 1, 7, min, neg1, 12345] {
                let x = xlen.trunc(x);
                assert_eq!(exec_div(&inst(Mnemonic::DIV), x, 0, xlen), neg1);
                assert_eq!(exec_div(&inst(Mnemonic::DIVU), x, 0, xlen), neg1);
                assert_eq!(exec_div(&inst(Mnemonic::REM), x, 0, xlen), x);
                assert_eq!(exec_div(&inst(Mnemonic::REMU), x, 0, xlen), x);
            }
            assert_eq!(exec_div(&inst(Mnemonic::DIV), min, neg1, xlen), min);
            assert_eq!(exec_div(&inst(Mnemonic::REM), min, neg1, xlen), 0);
        }
        // W-forms on RV64 follow the 32-bit rules with sign extension
        let m = inst(Mnemonic::DIVW);
        assert_eq!(exec_div(&m, 0x8000_0000, 0xFFFF_FFFF, Xlen::X64), 0xFFFF_FFFF_8000_0000);
        assert_eq!(exec_div(&inst(Mnemonic::REMUW), 0xDEAD_0000_8000_0001, 0, Xlen::X64), 0xFFFF_FFFF_8000_0001);
        assert_eq!(exec_div(&inst(Mnemonic::DIVUW), 5, 0, Xlen::X64), u64::MAX);
    }

    #[test]
    fn restoring_8bit_exhaustive() {
        for a in 0u64..256 {
            for b in 0u64..256 {
                let (q, r) = restoring_divide(a, b, 8);
                if b == 0 {
                    assert_eq!((q, r), (0xFF, a));
                } else {
                    assert_eq!((q, r), (a / b, a % b), "{a}/{b}");
                }
                let (sa, sb) = (a as u8 as i8, b as u8 as i8);
                let (q, r) = restoring_divide_signed(a, b, 8);
                let (eq, er) = if sb == 0 {
                    (-1i8, sa)
                } else {
                    (sa.wrapping_div(sb), sa.wrapping_rem(sb))
                };
                assert_eq!((q, r), (eq as u8 as u64, er as u8 as u64), "{sa}/{sb}");
            }
        }
    }

    #[test]
    fn iteration_counts() {
        assert_eq!(div_iterations(&inst(Mnemonic::DIV), Xlen::X32), 32);
        assert_eq!(div_iterations(&inst(Mnemonic::DIV), Xlen::X64), 64);
        assert_eq!(div_iterations(&inst(Mnemonic::DIVW), Xlen::X64), 32);
        assert_eq!(div_iterations(&inst(Mnemonic::REMU), Xlen::X64), 64);
    }
}
