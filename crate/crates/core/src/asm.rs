//! Minimal instruction encoder for building test programs and fixtures.
//!
//! Not a general assembler: no relocations, no pseudo-instruction parser.
//! [`Asm`] adds labels for branches and jumps.

use std::collections::HashMap;

use crate::isa::Mnemonic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Reg {
    ZERO = 0,
    RA,
    SP,
    GP,
    TP,
    T0,
    T1,
    T2,
    S0,
    S1,
    A0,
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
    S9,
    S10,
    S11,
    T3,
    T4,
    T5,
    T6,
}

impl Reg {
    pub fn x(n: u8) -> Reg {
        assert!(n < 32);
        // SAFETY: Reg is repr(u8) with discriminants 0..=31.
        unsafe { std::mem::transmute(n) }
    }

    pub fn num(self) -> u32 {
        self as u32
    }
}

fn r_type(f7: u32, rs2: Reg, rs1: Reg, f3: u32, rd: Reg, op: u32) -> u32 {
    (f7 << 25) | (rs2.num() << 20) | (rs1.num() << 15) | (f3 << 12) | (rd.num() << 7) | op
}

fn i_type(imm: i32, rs1: Reg, f3: u32, rd: Reg, op: u32) -> u32 {
    assert!((-2048..2048).contains(&imm), "imm {imm} out of range");
    (((imm as u32) & 0xFFF) << 20) | (rs1.num() << 15) | (f3 << 12) | (rd.num() << 7) | op
}

fn s_type(imm: i32, rs2: Reg, rs1: Reg, f3: u32, op: u32) -> u32 {
    assert!((-2048..2048).contains(&imm), "imm {imm} out of range");
    let imm = imm as u32;
    ((imm >> 5 & 0x7F) << 25) | (rs2.num() << 20) | (rs1.num() << 15) | (f3 << 12) | ((imm & 0x1F) << 7) | op
}

fn b_type(off: i32, rs2: Reg, rs1: Reg, f3: u32) -> u32 {
    assert!(off % 2 == 0 && (-4096..4096).contains(&off), "branch offset {off}");
    let o = off as u32;
    ((o >> 12 & 1) << 31)
        | ((o >> 5 & 0x3F) << 25)
        | (rs2.num() << 20)
        | (rs1.num() << 15)
        | (f3 << 12)
        | ((o >> 1 & 0xF) << 8)
        | ((o >> 11 & 1) << 7)
        | 0x63
}

fn u_type(imm20: u32, rd: Reg, op: u32) -> u32 {
    ((imm20 & 0xFFFFF) << 12) | (rd.num() << 7) | op
}

fn j_type(off: i32, rd: Reg) -> u32 {
    assert!(off % 2 == 0 && (-(1 << 20)..(1 << 20)).contains(&off), "jump offset {off}");
    let o = off as u32;
    ((o >> 20 & 1) << 31) | ((o >> 1 & 0x3FF) << 21) | ((o >> 11 & 1) << 20) | ((o >> 12 & 0xFF) << 12) | (rd.num() << 7) | 0x6F
}

pub fn nop() -> u32 {
    addi(Reg::ZERO, Reg::ZERO, 0)
}
pub fn lui(rd: Reg, imm20: u32) -> u32 {
    u_type(imm20, rd, 0x37)
}
pub fn auipc(rd: Reg, imm20: u32) -> u32 {
    u_type(imm20, rd, 0x17)
}
pub fn jal(rd: Reg, off: i32) -> u32 {
    j_type(off, rd)
}
pub fn jalr(rd: Reg, rs1: Reg, imm: i32) -> u32 {
    i_type(imm, rs1, 0, rd, 0x67)
}

/// Conditional branch by mnemonic.
pub fn branch(m: Mnemonic, rs1: Reg, rs2: Reg, off: i32) -> u32 {
    let f3 = match m {
        Mnemonic::BEQ => 0,
        Mnemonic::BNE => 1,
        Mnemonic::BLT => 4,
        Mnemonic::BGE => 5,
        Mnemonic::BLTU => 6,
        Mnemonic::BGEU => 7,
        _ => panic!("{m} is not a branch"),
    };
    b_type(off, rs2, rs1, f3)
}
pub fn beq(rs1: Reg, rs2: Reg, off: i32) -> u32 {
    branch(Mnemonic::BEQ, rs1, rs2, off)
}
pub fn bne(rs1: Reg, rs2: Reg, off: i32) -> u32 {
    branch(Mnemonic::BNE, rs1, rs2, off)
}

/// Load by mnemonic (`lb`, `lh`, `lw`, `lbu`, `lhu`, `lwu`, `ld`).
pub fn load(m: Mnemonic, rd: Reg, rs1: Reg, imm: i32) -> u32 {
    let f3 = match m {
        Mnemonic::LB => 0,
        Mnemonic::LH => 1,
        Mnemonic::LW => 2,
        Mnemonic::LD => 3,
        Mnemonic::LBU => 4,
        Mnemonic::LHU => 5,
        Mnemonic::LWU => 6,
        _ => panic!("{m} is not a load"),
    };
    i_type(imm, rs1, f3, rd, 0x03)
}
pub fn lw(rd: Reg, rs1: Reg, imm: i32) -> u32 {
    load(Mnemonic::LW, rd, rs1, imm)
}
pub fn ld(rd: Reg, rs1: Reg, imm: i32) -> u32 {
    load(Mnemonic::LD, rd, rs1, imm)
}

/// Store by mnemonic (`sb`, `sh`, `sw`, `sd`).
pub fn store(m: Mnemonic, rs2: Reg, rs1: Reg, imm: i32) -> u32 {
    let f3 = match m {
        Mnemonic::SB => 0,
        Mnemonic::SH => 1,
        Mnemonic::SW => 2,
        Mnemonic::SD => 3,
        _ => panic!("{m} is not a store"),
    };
    s_type(imm, rs2, rs1, f3, 0x23)
}
pub fn sw(rs2: Reg, rs1: Reg, imm: i32) -> u32 {
    store(Mnemonic::SW, rs2, rs1, imm)
}
pub fn sb(rs2: Reg, rs1: Reg, imm: i32) -> u32 {
    store(Mnemonic::SB, rs2, rs1, imm)
}

/// Register-immediate ALU op, including shifts and W-forms.
pub fn op_imm(m: Mnemonic, rd: Reg, rs1: Reg, imm: i32) -> u32 {
    use Mnemonic::*;
    match m {
        ADDI => i_type(imm, rs1, 0, rd, 0x13),
        SLTI => i_type(imm, rs1, 2, rd, 0x13),
        SLTIU => i_type(imm, rs1, 3, rd, 0x13),
        XORI => i_type(imm, rs1, 4, rd, 0x13),
        ORI => i_type(imm, rs1, 6, rd, 0x13),
        ANDI => i_type(imm, rs1, 7, rd, 0x13),
        SLLI => i_type(imm & 0x3F, rs1, 1, rd, 0x13),
        SRLI => i_type(imm & 0x3F, rs1, 5, rd, 0x13),
        SRAI => i_type((imm & 0x3F) | 0x400, rs1, 5, rd, 0x13),
        ADDIW => i_type(imm, rs1, 0, rd, 0x1B),
        SLLIW => i_type(imm & 0x1F, rs1, 1, rd, 0x1B),
        SRLIW => i_type(imm & 0x1F, rs1, 5, rd, 0x1B),
        SRAIW => i_type((imm & 0x1F) | 0x400, rs1, 5, rd, 0x1B),
        _ => panic!("{m} is not a register-immediate op"),
    }
}
pub fn addi(rd: Reg, rs1: Reg, imm: i32) -> u32 {
    op_imm(Mnemonic::ADDI, rd, rs1, imm)
}
pub fn slli(rd: Reg, rs1: Reg, sh: i32) -> u32 {
    op_imm(Mnemonic::SLLI, rd, rs1, sh)
}

/// Register-register op, including M and W-forms.
pub fn op(m: Mnemonic, rd: Reg, rs1: Reg, rs2: Reg) -> u32 {
    use Mnemonic::*;
    let (f7, f3, opc) = match m {
        ADD => (0, 0, 0x33),
        SUB => (0x20, 0, 0x33),
        SLL => (0, 1, 0x33),
        SLT => (0, 2, 0x33),
        SLTU => (0, 3, 0x33),
        XOR => (0, 4, 0x33),
        SRL => (0, 5, 0x33),
        SRA => (0x20, 5, 0x33),
        OR => (0, 6, 0x33),
        AND => (0, 7, 0x33),
        MUL => (1, 0, 0x33),
        MULH => (1, 1, 0x33),
        MULHSU => (1, 2, 0x33),
        MULHU => (1, 3, 0x33),
        DIV => (1, 4, 0x33),
        DIVU => (1, 5, 0x33),
        REM => (1, 6, 0x33),
        REMU => (1, 7, 0x33),
        ADDW => (0, 0, 0x3B),
        SUBW => (0x20, 0, 0x3B),
        SLLW => (0, 1, 0x3B),
        SRLW => (0, 5, 0x3B),
        SRAW => (0x20, 5, 0x3B),
        MULW => (1, 0, 0x3B),
        DIVW => (1, 4, 0x3B),
        DIVUW => (1, 5, 0x3B),
        REMW => (1, 6, 0x3B),
        REMUW => (1, 7, 0x3B),
        _ => panic!("{m} is not a register-register op"),
    };
    r_type(f7, rs2, rs1, f3, rd, opc)
}
pub fn add(rd: Reg, rs1: Reg, rs2: Reg) -> u32 {
    op(Mnemonic::ADD, rd, rs1, rs2)
}
pub fn mul(rd: Reg, rs1: Reg, rs2: Reg) -> u32 {
    op(Mnemonic::MUL, rd, rs1, rs2)
}
pub fn div(rd: Reg, rs1: Reg, rs2: Reg) -> u32 {
    op(Mnemonic::DIV, rd, rs1, rs2)
}

fn csr(f3: u32, rd: Reg, csr: u16, src: u32) -> u32 {
    ((csr as u32) << 20) | (src << 15) | (f3 << 12) | (rd.num() << 7) | 0x73
}
pub fn csrrw(rd: Reg, addr: u16, rs1: Reg) -> u32 {
    csr(1, rd, addr, rs1.num())
}
pub fn csrrs(rd: Reg, addr: u16, rs1: Reg) -> u32 {
    csr(2, rd, addr, rs1.num())
}
pub fn csrrc(rd: Reg, addr: u16, rs1: Reg) -> u32 {
    csr(3, rd, addr, rs1.num())
}
pub fn csrrwi(rd: Reg, addr: u16, uimm: u32) -> u32 {
    csr(5, rd, addr, uimm & 0x1F)
}
pub fn csrrsi(rd: Reg, addr: u16, uimm: u32) -> u32 {
    csr(6, rd, addr, uimm & 0x1F)
}
pub fn csrrci(rd: Reg, addr: u16, uimm: u32) -> u32 {
    csr(7, rd, addr, uimm & 0x1F)
}
pub fn ecall() -> u32 {
    0x0000_0073
}
pub fn ebreak() -> u32 {
    0x0010_0073
}
pub fn mret() -> u32 {
    0x3020_0073
}
pub fn fence() -> u32 {
    0x0FF0_000F
}

/// Load a 32-bit signed constant (sign-extended on RV64).
pub fn li(rd: Reg, value: i32) -> Vec<u32> {
    if (-2048..2048).contains(&value) {
        return vec![addi(rd, Reg::ZERO, value)];
    }
    let lo = (value << 20) >> 20;
    let hi = ((value as i64 - lo as i64) >> 12) as u32;
    let mut v = vec![lui(rd, hi)];
    if lo != 0 {
        v.push(addi(rd, rd, lo));
    }
    v
}

/// Write `code` to the exit device at the default MMIO base. Clobbers
/// `tmp` and t6.
pub fn exit_with(tmp: Reg, code: i32) -> Vec<u32> {
    let mut v = li(tmp, code);
    v.extend(exit_reg(tmp));
    v
}

/// Write register `value` to the exit device at the default MMIO base.
/// Clobbers t6.
pub fn exit_reg(value: Reg) -> Vec<u32> {
    vec![lui(Reg::T6, 0x10000), sw(value, Reg::T6, 8)]
}

#[derive(Clone, Debug)]
enum Item {
    Word(u32),
    Branch(Mnemonic, Reg, Reg, String),
    Jal(Reg, String),
}

/// Instruction list with forward and backward labels.
#[derive(Clone, Debug, Default)]
pub struct Asm {
    items: Vec<Item>,
    labels: HashMap<String, usize>,
}

impl Asm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn label(&mut self, name: &str) -> &mut Self {
        let prev = self.labels.insert(name.to_string(), self.items.len());
        assert!(prev.is_none(), "duplicate label {name}");
        self
    }

    pub fn i(&mut self, word: u32) -> &mut Self {
        self.items.push(Item::Word(word));
        self
    }

    pub fn all(&mut self, words: impl IntoIterator<Item = u32>) -> &mut Self {
        self.items.extend(words.into_iter().map(Item::Word));
        self
    }

    pub fn branch(&mut self, m: Mnemonic, rs1: Reg, rs2: Reg, target: &str) -> &mut Self {
        self.items.push(Item::Branch(m, rs1, rs2, target.to_string()));
        self
    }

    pub fn jal(&mut self, rd: Reg, target: &str) -> &mut Self {
        self.items.push(Item::Jal(rd, target.to_string()));
        self
    }

    pub fn finish(&self) -> Vec<u32> {
        let off = |here: usize, l: &str| {
            let t = *self.labels.get(l).unwrap_or_else(|| panic!("undefined label {l}"));
            (t as i32 - here as i32) * 4
        };
        self.items
            .iter()
            .enumerate()
            .map(|(k, it)| match it {
                Item::Word(w) => *w,
                Item::Branch(m, a, b, l) => branch(*m, *a, *b, off(k, l)),
                Item::Jal(rd, l) => jal(*rd, off(k, l)),
            })
            .collect()
    }
}
