use std::fmt;

use serde::{Deserialize, Serialize};

/// Every instruction any variant can decode.
#[allow(clippy::upper_case_acronyms)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum Mnemonic {
    // RV32I
    LUI,
    AUIPC,
    JAL,
    JALR,
    BEQ,
    BNE,
    BLT,
    BGE,
    BLTU,
    BGEU,
    LB,
    LH,
    LW,
    LBU,
    LHU,
    SB,
    SH,
    SW,
    ADDI,
    SLTI,
    SLTIU,
    XORI,
    ORI,
    ANDI,
    SLLI,
    SRLI,
    SRAI,
    ADD,
    SUB,
    SLL,
    SLT,
    SLTU,
    XOR,
    SRL,
    SRA,
    OR,
    AND,
    FENCE,
    ECALL,
    EBREAK,
    // Zifencei, executed as a no-op
    FENCE_I,
    // Machine-mode return
    MRET,
    // Zicsr
    CSRRW,
    CSRRS,
    CSRRC,
    CSRRWI,
    CSRRSI,
    CSRRCI,
    // RV64I
    LWU,
    LD,
    SD,
    ADDIW,
    SLLIW,
    SRLIW,
    SRAIW,
    ADDW,
    SUBW,
    SLLW,
    SRLW,
    SRAW,
    // M
    MUL,
    MULH,
    MULHSU,
    MULHU,
    DIV,
    DIVU,
    REM,
    REMU,
    // RV64M
    MULW,
    DIVW,
    DIVUW,
    REMW,
    REMUW,
}

impl Mnemonic {
    pub fn name(self) -> &'static str {
        use Mnemonic::*;
        match self {
            LUI => "lui",
            AUIPC => "auipc",
            JAL => "jal",
            JALR => "jalr",
            BEQ => "beq",
            BNE => "bne",
            BLT => "blt",
            BGE => "bge",
            BLTU => "bltu",
            BGEU => "bgeu",
            LB => "lb",
            LH => "lh",
            LW => "lw",
            LBU => "lbu",
            LHU => "lhu",
            SB => "sb",
            SH => "sh",
            SW => "sw",
            ADDI => "addi",
            SLTI => "slti",
            SLTIU => "sltiu",
            XORI => "xori",
            ORI => "ori",
            ANDI => "andi",
            SLLI => "slli",
            SRLI => "srli",
            SRAI => "srai",
            ADD => "add",
            SUB => "sub",
            SLL => "sll",
            SLT => "slt",
            SLTU => "sltu",
            XOR => "xor",
            SRL => "srl",
            SRA => "sra",
            OR => "or",
            AND => "and",
            FENCE => "fence",
            ECALL => "ecall",
            EBREAK => "ebreak",
            FENCE_I => "fence.i",
            MRET => "mret",
            CSRRW => "csrrw",
            CSRRS => "csrrs",
            CSRRC => "csrrc",
            CSRRWI => "csrrwi",
            CSRRSI => "csrrsi",
            CSRRCI => "csrrci",
            LWU => "lwu",
            LD => "ld",
            SD => "sd",
            ADDIW => "addiw",
            SLLIW => "slliw",
            SRLIW => "srliw",
            SRAIW => "sraiw",
            ADDW => "addw",
            SUBW => "subw",
            SLLW => "sllw",
            SRLW => "srlw",
            SRAW => "sraw",
            MUL => "mul",
            MULH => "mulh",
            MULHSU => "mulhsu",
            MULHU => "mulhu",
            DIV => "div",
            DIVU => "divu",
            REM => "rem",
            REMU => "remu",
            MULW => "mulw",
            DIVW => "divw",
            DIVUW => "divuw",
            REMW => "remw",
            REMUW => "remuw",
        }
    }

    pub fn timing_class(self) -> TimingClass {
        use Mnemonic::*;
        match self {
            LB | LH | LW | LBU | LHU | LWU | LD => TimingClass::Load,
            SB | SH | SW | SD => TimingClass::Store,
            BEQ | BNE | BLT | BGE | BLTU | BGEU => TimingClass::Branch,
            JAL => TimingClass::JumpDirect,
            JALR => TimingClass::JumpIndirect,
            MUL | MULH | MULHSU | MULHU | MULW => TimingClass::Mul,
            DIV | DIVU | REM | REMU | DIVW | DIVUW | REMW | REMUW => TimingClass::Div,
            CSRRW | CSRRS | CSRRC | CSRRWI | CSRRSI | CSRRCI => TimingClass::Csr,
            FENCE | FENCE_I | ECALL | EBREAK | MRET => TimingClass::System,
            _ => TimingClass::Alu,
        }
    }

    /// W-form (32-bit operation, sign-extended result) on RV64.
    pub fn is_word_op(self) -> bool {
        use Mnemonic::*;
        matches!(
            self,
            ADDIW
                | SLLIW
                | SRLIW
                | SRAIW
                | ADDW
                | SUBW
                | SLLW
                | SRLW
                | SRAW
                | MULW
                | DIVW
                | DIVUW
                | REMW
                | REMUW
        )
    }
}

impl fmt::Display for Mnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Coarse classification used by the hazard and stall logic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimingClass {
    Alu,
    Load,
    Store,
    Branch,
    JumpDirect,
    JumpIndirect,
    Mul,
    Div,
    Csr,
    System,
}

/// One decoded instruction.
///
/// For CSR instructions `imm` holds the 12-bit CSR address and, for the
/// immediate forms, `rs1` holds the 5-bit zero-extended immediate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodedInstruction {
    pub mnemonic: Mnemonic,
    pub rd: u8,
    pub rs1: u8,
    pub rs2: u8,
    pub imm: i64,
    pub timing_class: TimingClass,
    pub width_suffix: bool,
    pub raw: u32,
}

impl DecodedInstruction {
    pub fn csr_addr(&self) -> u16 {
        debug_assert_eq!(self.timing_class, TimingClass::Csr);
        (self.imm as u64 & 0xFFF) as u16
    }

    /// Architectural source registers read through the register file.
    pub fn sources(&self) -> [Option<u8>; 2] {
        use Mnemonic::*;
        let r1 = Some(self.rs1);
        let r2 = Some(self.rs2);
        match self.mnemonic {
            LUI | AUIPC | JAL | FENCE | FENCE_I | ECALL | EBREAK | MRET | CSRRWI | CSRRSI
            | CSRRCI => [None, None],
            JALR | LB | LH | LW | LBU | LHU | LWU | LD | ADDI | SLTI | SLTIU | XORI | ORI
            | ANDI | SLLI | SRLI | SRAI | ADDIW | SLLIW | SRLIW | SRAIW | CSRRW | CSRRS
            | CSRRC => [r1, None],
            _ => [r1, r2],
        }
    }

    /// Destination register, if the instruction writes one (x0 excluded).
    pub fn dest(&self) -> Option<u8> {
        let writes = !matches!(
            self.timing_class,
            TimingClass::Store | TimingClass::Branch | TimingClass::System
        );
        (writes && self.rd != 0).then_some(self.rd)
    }
}

impl fmt::Display for DecodedInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TimingClass::*;
        let m = self.mnemonic;
        match self.timing_class {
            Load => write!(f, "{m} x{}, {}(x{})", self.rd, self.imm, self.rs1),
            Store => write!(f, "{m} x{}, {}(x{})", self.rs2, self.imm, self.rs1),
            Branch => write!(f, "{m} x{}, x{}, {}", self.rs1, self.rs2, self.imm),
            JumpDirect => write!(f, "{m} x{}, {}", self.rd, self.imm),
            JumpIndirect => write!(f, "{m} x{}, {}(x{})", self.rd, self.imm, self.rs1),
            Csr => write!(f, "{m} x{}, {:#x}, {}", self.rd, self.csr_addr(), self.rs1),
            System => write!(f, "{m}"),
            _ if matches!(self.mnemonic, Mnemonic::LUI | Mnemonic::AUIPC) => {
                write!(f, "{m} x{}, {:#x}", self.rd, (self.imm >> 12) & 0xFFFFF)
            }
            _ if self.sources()[1].is_some() => {
                write!(f, "{m} x{}, x{}, x{}", self.rd, self.rs1, self.rs2)
            }
            _ => write!(f, "{m} x{}, x{}, {}", self.rd, self.rs1, self.imm),
        }
    }
}
