//! Instruction decoder, gated by the variant's width and ISA profile.

use super::inst::{DecodedInstruction, Mnemonic};
use super::trap::TrapCause;
use crate::config::{CoreConfig, Isa, Xlen};

const OP_LUI: u32 = 0b0110111;
const OP_AUIPC: u32 = 0b0010111;
const OP_JAL: u32 = 0b1101111;
const OP_JALR: u32 = 0b1100111;
const OP_BRANCH: u32 = 0b1100011;
const OP_LOAD: u32 = 0b0000011;
const OP_STORE: u32 = 0b0100011;
const OP_IMM: u32 = 0b0010011;
const OP_REG: u32 = 0b0110011;
const OP_IMM_32: u32 = 0b0011011;
const OP_REG_32: u32 = 0b0111011;
const OP_MISC_MEM: u32 = 0b0001111;
const OP_SYSTEM: u32 = 0b1110011;

#[inline]
fn bits(raw: u32, hi: u32, lo: u32) -> u32 {
    (raw >> lo) & ((1 << (hi - lo + 1)) - 1)
}

fn imm_i(raw: u32) -> i64 {
    (raw as i32 >> 20) as i64
}

fn imm_s(raw: u32) -> i64 {
    (((raw & 0xFE00_0000) as i32 >> 20) | bits(raw, 11, 7) as i32) as i64
}

fn imm_b(raw: u32) -> i64 {
    let v = ((raw & 0x8000_0000) as i32 >> 19) as u32
        | (bits(raw, 7, 7) << 11)
        | (bits(raw, 30, 25) << 5)
        | (bits(raw, 11, 8) << 1);
    v as i32 as i64
}

fn imm_u(raw: u32) -> i64 {
    (raw & 0xFFFF_F000) as i32 as i64
}

fn imm_j(raw: u32) -> i64 {
    let v = ((raw & 0x8000_0000) as i32 >> 11) as u32
        | (bits(raw, 19, 12) << 12)
        | (bits(raw, 20, 20) << 11)
        | (bits(raw, 30, 21) << 1);
    v as i32 as i64
}

/// Decode one 32-bit word. Anything the variant does not implement yields
/// an illegal-instruction trap cause; this never fails otherwise.
pub fn decode(raw: u32, config: &CoreConfig) -> Result<DecodedInstruction, TrapCause> {
    decode_with(raw, config.xlen, config.isa)
}

pub fn decode_with(raw: u32, xlen: Xlen, isa: Isa) -> Result<DecodedInstruction, TrapCause> {
    use Mnemonic::*;
    let illegal = || TrapCause::illegal(raw);
    let rv64 = xlen == Xlen::X64;
    let opcode = raw & 0x7F;
    let rd = bits(raw, 11, 7) as u8;
    let rs1 = bits(raw, 19, 15) as u8;
    let rs2 = bits(raw, 24, 20) as u8;
    let funct3 = bits(raw, 14, 12);
    let funct7 = bits(raw, 31, 25);

    let (mnemonic, imm) = match opcode {
        OP_LUI => (LUI, imm_u(raw)),
        OP_AUIPC => (AUIPC, imm_u(raw)),
        OP_JAL => (JAL, imm_j(raw)),
        OP_JALR if funct3 == 0 => (JALR, imm_i(raw)),
        OP_BRANCH => {
            let m = match funct3 {
                0 => BEQ,
                1 => BNE,
                4 => BLT,
                5 => BGE,
                6 => BLTU,
                7 => BGEU,
                _ => return Err(illegal()),
            };
            (m, imm_b(raw))
        }
        OP_LOAD => {
            let m = match funct3 {
                0 => LB,
                1 => LH,
                2 => LW,
                4 => LBU,
                5 => LHU,
                6 if rv64 => LWU,
                3 if rv64 => LD,
                _ => return Err(illegal()),
            };
            (m, imm_i(raw))
        }
        OP_STORE => {
            let m = match funct3 {
                0 => SB,
                1 => SH,
                2 => SW,
                3 if rv64 => SD,
                _ => return Err(illegal()),
            };
            (m, imm_s(raw))
        }
        OP_IMM => match funct3 {
            0 => (ADDI, imm_i(raw)),
            2 => (SLTI, imm_i(raw)),
            3 => (SLTIU, imm_i(raw)),
            4 => (XORI, imm_i(raw)),
            6 => (ORI, imm_i(raw)),
            7 => (ANDI, imm_i(raw)),
            1 | 5 => {
                // RV32 shifts use a 5-bit shamt; bit 25 set is reserved there.
                let funct6 = bits(raw, 31, 26);
                let shamt = bits(raw, 25, 20);
                if !rv64 && shamt & 0x20 != 0 {
                    return Err(illegal());
                }
                let m = match (funct3, funct6) {
                    (1, 0) => SLLI,
                    (5, 0) => SRLI,
                    (5, 0x10) => SRAI,
                    _ => return Err(illegal()),
                };
                (m, shamt as i64)
            }
            _ => return Err(illegal()),
        },
        OP_REG => {
            let m = match (funct7, funct3) {
                (0, 0) => ADD,
                (0x20, 0) => SUB,
                (0, 1) => SLL,
                (0, 2) => SLT,
                (0, 3) => SLTU,
                (0, 4) => XOR,
                (0, 5) => SRL,
                (0x20, 5) => SRA,
                (0, 6) => OR,
                (0, 7) => AND,
                (1, f) if isa.has_m() => [MUL, MULH, MULHSU, MULHU, DIV, DIVU, REM, REMU][f as usize],
                _ => return Err(illegal()),
            };
            (m, 0)
        }
        OP_IMM_32 if rv64 => match (funct3, funct7) {
            (0, _) => (ADDIW, imm_i(raw)),
            (1, 0) => (SLLIW, rs2 as i64),
            (5, 0) => (SRLIW, rs2 as i64),
            (5, 0x20) => (SRAIW, rs2 as i64),
            _ => return Err(illegal()),
        },
        OP_REG_32 if rv64 => {
            let m = match (funct7, funct3) {
                (0, 0) => ADDW,
                (0x20, 0) => SUBW,
                (0, 1) => SLLW,
                (0, 5) => SRLW,
                (0x20, 5) => SRAW,
                (1, 0) if isa.has_m() => MULW,
                (1, 4) if isa.has_m() => DIVW,
                (1, 5) if isa.has_m() => DIVUW,
                (1, 6) if isa.has_m() => REMW,
                (1, 7) if isa.has_m() => REMUW,
                _ => return Err(illegal()),
            };
            (m, 0)
        }
        OP_MISC_MEM => match funct3 {
            0 => (FENCE, 0),
            1 => (FENCE_I, 0),
            _ => return Err(illegal()),
        },
        OP_SYSTEM => match funct3 {
            0 => match raw {
                0x0000_0073 => (ECALL, 0),
                0x0010_0073 => (EBREAK, 0),
                0x3020_0073 => (MRET, 0),
                _ => return Err(illegal()),
            },
            1 => (CSRRW, bits(raw, 31, 20) as i64),
            2 => (CSRRS, bits(raw, 31, 20) as i64),
            3 => (CSRRC, bits(raw, 31, 20) as i64),
            5 => (CSRRWI, bits(raw, 31, 20) as i64),
            6 => (CSRRSI, bits(raw, 31, 20) as i64),
            7 => (CSRRCI, bits(raw, 31, 20) as i64),
            _ => return Err(illegal()),
        },
        _ => return Err(illegal()),
    };

    let class = mnemonic.timing_class();
    let (rs1, rs2) = match mnemonic {
        LUI | AUIPC | JAL => (0, 0),
        _ => (rs1, rs2),
    };
    Ok(DecodedInstruction {
        mnemonic,
        rd,
        rs1,
        rs2,
        imm,
        timing_class: class,
        width_suffix: mnemonic.is_word_op(),
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Depth;
    use crate::isa::inst::TimingClass;

    fn cfg(xlen: Xlen, isa: Isa) -> CoreConfig {
        CoreConfig::new(xlen, isa, Depth::FIVE).unwrap()
    }

    /// Encodings produced by the LLVM integrated assembler
    /// (`clang --target=riscv64 -march=rv64im -mno-relax`).
    const REFERENCE: &[(u32, Mnemonic, u8, u8, u8, i64)] = &[
        (0x00000013, Mnemonic::ADDI, 0, 0, 0, 0),
        (0x0015051b, Mnemonic::ADDIW, 10, 10, 1, 1),
        (0x02c58533, Mnemonic::MUL, 10, 11, 12, 0),
        (0x03c394b3, Mnemonic::MULH, 9, 7, 28, 0),
        (0x031827b3, Mnemonic::MULHSU, 15, 16, 17, 0),
        (0x027332b3, Mnemonic::MULHU, 5, 6, 7, 0),
        (0x02f746b3, Mnemonic::DIV, 13, 14, 15, 0),
        (0x02f756b3, Mnemonic::DIVU, 13, 14, 15, 0),
        (0x02f766b3, Mnemonic::REM, 13, 14, 15, 0),
        (0x02f776b3, Mnemonic::REMU, 13, 14, 15, 0),
        (0x02c5853b, Mnemonic::MULW, 10, 11, 12, 0),
        (0x0349c93b, Mnemonic::DIVW, 18, 19, 20, 0),
        (0x0349d93b, Mnemonic::DIVUW, 18, 19, 20, 0),
        (0x0349e93b, Mnemonic::REMW, 18, 19, 20, 0),
        (0x0349f93b, Mnemonic::REMUW, 18, 19, 20, 0),
        (0x00813503, Mnemonic::LD, 10, 2, 8, 8),
        (0xfeb13823, Mnemonic::SD, 16, 2, 11, -16),
        (0x00456283, Mnemonic::LWU, 5, 10, 4, 4),
        (0x02151513, Mnemonic::SLLI, 10, 10, 1, 33),
        (0x43f65593, Mnemonic::SRAI, 11, 12, 31, 63),
        (0x01f5151b, Mnemonic::SLLIW, 10, 10, 31, 31),
        (0x4075551b, Mnemonic::SRAIW, 10, 10, 7, 7),
        (0xfffff537, Mnemonic::LUI, 10, 0, 0, -4096),
        (0x00012297, Mnemonic::AUIPC, 5, 0, 0, 0x12000),
        (0x059000ef, Mnemonic::JAL, 1, 0, 0, 2136),
        (0x00008067, Mnemonic::JALR, 0, 1, 0, 0),
        (0xfeb50ee3, Mnemonic::BEQ, 29, 10, 11, -4),
        (0x0462f4e3, Mnemonic::BGEU, 9, 5, 6, 2120),
        (0x30559573, Mnemonic::CSRRW, 10, 11, 5, 0x305),
        (0xb0002573, Mnemonic::CSRRS, 10, 0, 0, 0xb00),
        (0x30047073, Mnemonic::CSRRCI, 0, 8, 0, 0x300),
        (0x341fd673, Mnemonic::CSRRWI, 12, 31, 1, 0x341),
        (0x00000073, Mnemonic::ECALL, 0, 0, 0, 0),
        (0x00100073, Mnemonic::EBREAK, 0, 0, 1, 0),
        (0x30200073, Mnemonic::MRET, 0, 0, 2, 0),
        (0x0ff0000f, Mnemonic::FENCE, 0, 0, 15, 0),
        (0x0000100f, Mnemonic::FENCE_I, 0, 0, 0, 0),
        (0xfea58fa3, Mnemonic::SB, 31, 11, 10, -1),
        (0x00a59123, Mnemonic::SH, 2, 11, 10, 2),
        (0x7ea5afa3, Mnemonic::SW, 31, 11, 10, 2047),
        (0x80058283, Mnemonic::LB, 5, 11, 0, -2048),
        (0x00059283, Mnemonic::LH, 5, 11, 0, 0),
        (0x0005c283, Mnemonic::LBU, 5, 11, 0, 0),
        (0x0005d283, Mnemonic::LHU, 5, 11, 0, 0),
        (0x40c5853b, Mnemonic::SUBW, 10, 11, 12, 0),
        (0x00c5953b, Mnemonic::SLLW, 10, 11, 12, 0),
        (0x00c5d53b, Mnemonic::SRLW, 10, 11, 12, 0),
        (0x40c5d53b, Mnemonic::SRAW, 10, 11, 12, 0),
        (0x00c5853b, Mnemonic::ADDW, 10, 11, 12, 0),
        (0x0015551b, Mnemonic::SRLIW, 10, 10, 1, 1),
        (0xfff5b513, Mnemonic::SLTIU, 10, 11, 31, -1),
        (0xfff5a513, Mnemonic::SLTI, 10, 11, 31, -1),
        (0xfff5c513, Mnemonic::XORI, 10, 11, 31, -1),
        (0x40c58533, Mnemonic::SUB, 10, 11, 12, 0),
        (0x40c5d533, Mnemonic::SRA, 10, 11, 12, 0),
        (0x00c5d533, Mnemonic::SRL, 10, 11, 12, 0),
        (0x00c59533, Mnemonic::SLL, 10, 11, 12, 0),
    ];

    #[test]
    fn reference_assembler_encodings() {
        let c = cfg(Xlen::X64, Isa::IM);
        for &(raw, m, rd, rs1, rs2, imm) in REFERENCE {
            let d = decode(raw, &c).unwrap_or_else(|e| panic!("{raw:#010x}: {e}"));
            assert_eq!(d.mnemonic, m, "{raw:#010x}");
            assert_eq!(d.rd, rd, "{raw:#010x} rd");
            if !matches!(m, Mnemonic::LUI | Mnemonic::AUIPC | Mnemonic::JAL) {
                assert_eq!(d.rs1, rs1, "{raw:#010x} rs1");
            }
            if d.sources()[1].is_some() {
                assert_eq!(d.rs2, rs2, "{raw:#010x} rs2");
            }
            assert_eq!(d.imm, imm, "{raw:#010x} imm");
            assert_eq!(d.width_suffix, m.is_word_op());
        }
    }

    #[test]
    fn canonical_nop() {
        let d = decode(0x13, &cfg(Xlen::X32, Isa::I)).unwrap();
        assert_eq!((d.mnemonic, d.rd, d.rs1, d.imm), (Mnemonic::ADDI, 0, 0, 0));
        assert_eq!(d.timing_class, TimingClass::Alu);
    }

    #[test]
    fn rv64_only_encodings_illegal_on_rv32() {
        let c32 = cfg(Xlen::X32, Isa::IM);
        let c64 = cfg(Xlen::X64, Isa::IM);
        for raw in [
            0x0015051b, // addiw
            0x00813503, // ld
            0xfeb13823, // sd
            0x00456283, // lwu
            0x02151513, // slli a0, a0, 33
            0x43f65593, // srai a1, a2, 63
            0x02c5853b, // mulw
            0x40c5853b, // subw
        ] {
            assert!(decode(raw, &c64).is_ok(), "{raw:#x}");
            let e = decode(raw, &c32).unwrap_err();
            assert_eq!(e.cause_code(), 2);
            assert_eq!(e.tval, raw as u64);
        }
        let addiw = decode(0x0015051b, &c64).unwrap();
        assert!(addiw.width_suffix);
    }

    #[test]
    fn m_extension_gated_by_isa() {
        let mul = 0x02c58533;
        assert!(decode(mul, &cfg(Xlen::X32, Isa::I)).is_err());
        assert!(decode(mul, &cfg(Xlen::X64, Isa::I)).is_err());
        let d = decode(mul, &cfg(Xlen::X32, Isa::IM)).unwrap();
        assert_eq!(d.timing_class, TimingClass::Mul);
        assert!(decode(0x0349c93b, &cfg(Xlen::X64, Isa::I)).is_err());
        assert_eq!(decode(0x02f746b3, &cfg(Xlen::X32, Isa::IM)).unwrap().timing_class, TimingClass::Div);
    }

    #[test]
    fn shift_reserved_bits() {
        let c64 = cfg(Xlen::X64, Isa::IM);
        // slliw with bit 25 set is reserved
        assert!(decode(0x01f5151b | (1 << 25), &c64).is_err());
        // slli with funct6 != 0
        assert!(decode(0x02151513 | (1 << 27), &c64).is_err());
        // srai with 6-bit shamt is fine on RV64 only
        assert_eq!(decode(0x43f65593, &c64).unwrap().imm, 63);
    }

    #[test]
    fn system_encodings() {
        let c = cfg(Xlen::X32, Isa::I);
        assert!(decode(0x10500073, &c).is_err()); // wfi
        assert!(decode(0x00004073, &c).is_err()); // funct3 = 4
        assert!(decode(0x00000000, &c).is_err());
        assert!(decode(0xffffffff, &c).is_err());
    }
}
