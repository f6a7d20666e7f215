use super::inst::Mnemonic;
use crate::config::{CoreConfig, Isa, Xlen};

use Mnemonic::*;

const BASE: &[Mnemonic] = &[
    LUI, AUIPC, JAL, JALR, BEQ, BNE, BLT, BGE, BLTU, BGEU, LB, LH, LW, LBU, LHU, SB, SH, SW, ADDI,
    SLTI, SLTIU, XORI, ORI, ANDI, SLLI, SRLI, SRAI, ADD, SUB, SLL, SLT, SLTU, XOR, SRL, SRA, OR,
    AND, FENCE, ECALL, EBREAK,
];
const SYSTEM: &[Mnemonic] = &[FENCE_I, MRET, CSRRW, CSRRS, CSRRC, CSRRWI, CSRRSI, CSRRCI];
const RV64_BASE: &[Mnemonic] =
    &[LWU, LD, SD, ADDIW, SLLIW, SRLIW, SRAIW, ADDW, SUBW, SLLW, SRLW, SRAW];
const M: &[Mnemonic] = &[MUL, MULH, MULHSU, MULHU, DIV, DIVU, REM, REMU];
const RV64_M: &[Mnemonic] = &[MULW, DIVW, DIVUW, REMW, REMUW];

/// Every mnemonic the variant decodes, in a stable order.
pub fn instruction_roster(config: &CoreConfig) -> Vec<Mnemonic> {
    roster_for(config.xlen, config.isa)
}

pub fn roster_for(xlen: Xlen, isa: Isa) -> Vec<Mnemonic> {
    let mut out: Vec<Mnemonic> = BASE.iter().chain(SYSTEM).copied().collect();
    if xlen == Xlen::X64 {
        out.extend_from_slice(RV64_BASE);
    }
    if isa.has_m() {
        out.extend_from_slice(M);
        if xlen == Xlen::X64 {
            out.extend_from_slice(RV64_M);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(x: Xlen, i: Isa) -> BTreeSet<Mnemonic> {
        roster_for(x, i).into_iter().collect()
    }

    #[test]
    fn m_deltas() {
        let d32: Vec<_> = set(Xlen::X32, Isa::IM).difference(&set(Xlen::X32, Isa::I)).copied().collect();
        assert_eq!(d32, M);
        let d64: BTreeSet<_> = set(Xlen::X64, Isa::IM).difference(&set(Xlen::X64, Isa::I)).copied().collect();
        let expect: BTreeSet<_> = M.iter().chain(RV64_M).copied().collect();
        assert_eq!(d64, expect);
        assert_eq!(d64.len(), 13);
    }

    #[test]
    fn no_duplicates_and_counts() {
        for (x, i, n) in [
            (Xlen::X32, Isa::I, 48),
            (Xlen::X32, Isa::IM, 56),
            (Xlen::X64, Isa::I, 60),
            (Xlen::X64, Isa::IM, 73),
        ] {
            let r = roster_for(x, i);
            assert_eq!(r.len(), set(x, i).len());
            assert_eq!(r.len(), n);
        }
    }

    #[test]
    fn w_forms_only_on_rv64() {
        assert!(roster_for(Xlen::X32, Isa::IM).iter().all(|m| !m.is_word_op()));
    }
}
