//! Independent wide-integer oracles shared by the property and acceptance
//! tests. Nothing here calls into the simulator's arithmetic.

#![allow(dead_code)]

use rvpipe_core::isa::decode::decode_with;
use rvpipe_core::{asm, DecodedInstruction, Isa, Mnemonic, Xlen};

pub const MUL_OPS: [Mnemonic; 5] = [Mnemonic::MUL, Mnemonic::MULH, Mnemonic::MULHSU, Mnemonic::MULHU, Mnemonic::MULW];
pub const DIV_OPS: [Mnemonic; 8] = [
    Mnemonic::DIV,
    Mnemonic::DIVU,
    Mnemonic::REM,
    Mnemonic::REMU,
    Mnemonic::DIVW,
    Mnemonic::DIVUW,
    Mnemonic::REMW,
    Mnemonic::REMUW,
];

pub fn is_word(m: Mnemonic) -> bool {
    use Mnemonic::*;
    matches!(m, ADDW | ADDIW | SUBW | SLLW | SLLIW | SRLW | SRLIW | SRAW | SRAIW | MULW | DIVW | DIVUW | REMW | REMUW)
}

fn mask(bits: u32) -> u128 {
    (1u128 << bits) - 1
}

fn sext(v: u128, bits: u32) -> i128 {
    let v = v & mask(bits);
    if v >> (bits - 1) & 1 == 1 {
        v as i128 - (1i128 << bits)
    } else {
        v as i128
    }
}

/// Truncate an operation result computed on `op_bits` to those bits, then
/// sign-extend it to the register width.
fn finish(r: i128, op_bits: u32, xlen: Xlen) -> u64 {
    let v = sext(r as u128, op_bits) as u128 & mask(xlen.bits());
    v as u64
}

fn op_bits(m: Mnemonic, xlen: Xlen) -> u32 {
    if is_word(m) {
        32
    } else {
        xlen.bits()
    }
}

/// Register-register or register-immediate integer op; `b` is rs2 or the
/// immediate.
pub fn alu_oracle(m: Mnemonic, a: u64, b: u64, xlen: Xlen) -> u64 {
    use Mnemonic::*;
    let n = op_bits(m, xlen);
    let (ua, ub) = (a as u128 & mask(n), b as u128 & mask(n));
    let (sa, sb) = (sext(ua, n), sext(ub, n));
    let sh = (b as u32) & (n - 1);
    let r: i128 = match m {
        ADD | ADDI | ADDW | ADDIW => sa + sb,
        SUB | SUBW => sa - sb,
        SLL | SLLI | SLLW | SLLIW => (ua << sh) as i128,
        SRL | SRLI | SRLW | SRLIW => (ua >> sh) as i128,
        SRA | SRAI | SRAW | SRAIW => sa >> sh,
        SLT | SLTI => (sa < sb) as i128,
        SLTU | SLTIU => (ua < ub) as i128,
        XOR | XORI => (ua ^ ub) as i128,
        OR | ORI => (ua | ub) as i128,
        AND | ANDI => (ua & ub) as i128,
        _ => panic!("{m} has no ALU oracle"),
    };
    finish(r, n, xlen)
}

pub fn mul_oracle(m: Mnemonic, a: u64, b: u64, xlen: Xlen) -> u64 {
    use Mnemonic::*;
    let n = op_bits(m, xlen);
    let (ua, ub) = (a as u128 & mask(n), b as u128 & mask(n));
    let (sa, sb) = (sext(ua, n), sext(ub, n));
    let r: i128 = match m {
        MUL | MULW => ua.wrapping_mul(ub) as i128,
        MULH => (sa * sb) >> n,
        MULHU => ((ua * ub) >> n) as i128,
        MULHSU => (sa * ub as i128) >> n,
        _ => panic!("{m} has no multiply oracle"),
    };
    finish(r, n, xlen)
}

pub fn div_oracle(m: Mnemonic, a: u64, b: u64, xlen: Xlen) -> u64 {
    use Mnemonic::*;
    let n = op_bits(m, xlen);
    let (ua, ub) = (a as u128 & mask(n), b as u128 & mask(n));
    let (sa, sb) = (sext(ua, n), sext(ub, n));
    let min = -(1i128 << (n - 1));
    let r: i128 = match m {
        DIV | DIVW if sb == 0 => -1,
        DIV | DIVW if sa == min && sb == -1 => min,
        DIV | DIVW => sa / sb,
        REM | REMW if sb == 0 => sa,
        REM | REMW if sa == min && sb == -1 => 0,
        REM | REMW => sa % sb,
        DIVU | DIVUW if ub == 0 => mask(n) as i128,
        DIVU | DIVUW => (ua / ub) as i128,
        REMU | REMUW if ub == 0 => ua as i128,
        REMU | REMUW => (ua % ub) as i128,
        _ => panic!("{m} has no divide oracle"),
    };
    finish(r, n, xlen)
}

/// Decode a register-register M op for the given width.
pub fn decoded_op(m: Mnemonic, xlen: Xlen) -> DecodedInstruction {
    use asm::Reg::*;
    decode_with(asm::op(m, A0, A1, A2), xlen, Isa::IM).expect("legal encoding")
}

/// Operand pairs biased toward edges: zero, ±1, extremes and small values
/// mixed with uniform ones.
pub fn edge_biased(rng: &mut impl rand::Rng) -> u64 {
    const EDGES: [u64; 10] = [
        0,
        1,
        u64::MAX,
        2,
        0x8000_0000,
        0x7FFF_FFFF,
        0xFFFF_FFFF,
        0x8000_0000_0000_0000,
        0x7FFF_FFFF_FFFF_FFFF,
        0xFFFF_FFFF_8000_0000,
    ];
    match rng.gen_range(0..8) {
        0 => EDGES[rng.gen_range(0..EDGES.len())],
        1 => rng.gen_range(0..256),
        2 => (rng.gen::<i8>() as i64) as u64,
        _ => rng.gen(),
    }
}
