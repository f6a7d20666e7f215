//! Integer ALU: parallel 32-bit and XLEN-wide datapaths, result selected by
//! the instruction width.

use super::inst::{DecodedInstruction, Mnemonic};
use crate::config::Xlen;

/// Sign-extend the low 32 bits of `v` to 64 bits.
#[inline]
pub fn sext32(v: u64) -> u64 {
    v as u32 as i32 as i64 as u64
}

fn shamt_mask(xlen: Xlen) -> u64 {
    (xlen.bits() - 1) as u64
}

/// Full-width ALU result for register/immediate integer operations.
///
/// `a` is the rs1 value, `b` is either rs2 or the sign-extended immediate
/// (already selected by the caller via [`alu_operand_b`]).
pub fn alu(m: Mnemonic, a: u64, b: u64, xlen: Xlen) -> u64 {
    use Mnemonic::*;
    if m.is_word_op() {
        return sext32(alu32(m, a as u32, b as u32) as u64);
    }
    let sa = xlen.signed(a);
    let sb = xlen.signed(b);
    let r = match m {
        ADD | ADDI => a.wrapping_add(b),
        SUB => a.wrapping_sub(b),
        SLL | SLLI => a << (b & shamt_mask(xlen)),
        SRL | SRLI => xlen.trunc(a) >> (b & shamt_mask(xlen)),
        SRA | SRAI => (sa >> (b & shamt_mask(xlen))) as u64,
        SLT | SLTI => (sa < sb) as u64,
        SLTU | SLTIU => (xlen.trunc(a) < xlen.trunc(b)) as u64,
        XOR | XORI => a ^ b,
        OR | ORI => a | b,
        AND | ANDI => a & b,
        LUI => b,
        _ => unreachable!("{m} is not an ALU op"),
    };
    xlen.trunc(r)
}

fn alu32(m: Mnemonic, a: u32, b: u32) -> u32 {
    use Mnemonic::*;
    match m {
        ADDW | ADDIW => a.wrapping_add(b),
        SUBW => a.wrapping_sub(b),
        SLLW | SLLIW => a << (b & 31),
        SRLW | SRLIW => a >> (b & 31),
        SRAW | SRAIW => ((a as i32) >> (b & 31)) as u32,
        _ => unreachable!("{m} is not a W-form ALU op"),
    }
}

/// Second ALU operand: rs2 for register forms, the immediate otherwise.
pub fn alu_operand_b(inst: &DecodedInstruction, rs2: u64, xlen: Xlen) -> u64 {
    if inst.sources()[1].is_some() {
        rs2
    } else {
        xlen.trunc(inst.imm as u64)
    }
}

/// Evaluate the ALU-class instruction `inst` with source values `a`, `b`
/// (rs1, rs2) at `pc`. Covers LUI and AUIPC.
pub fn exec_alu(inst: &DecodedInstruction, a: u64, b: u64, pc: u64, xlen: Xlen) -> u64 {
    match inst.mnemonic {
        Mnemonic::AUIPC => xlen.trunc(pc.wrapping_add(inst.imm as u64)),
        Mnemonic::LUI => xlen.trunc(inst.imm as u64),
        m => alu(m, a, alu_operand_b(inst, b, xlen), xlen),
    }
}

/// Branch condition.
pub fn branch_taken(m: Mnemonic, a: u64, b: u64, xlen: Xlen) -> bool {
    use Mnemonic::*;
    match m {
        BEQ => a == b,
        BNE => a != b,
        BLT => xlen.signed(a) < xlen.signed(b),
        BGE => xlen.signed(a) >= xlen.signed(b),
        BLTU => a < b,
        BGEU => a >= b,
        _ => unreachable!("{m} is not a branch"),
    }
}
