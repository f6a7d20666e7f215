//! The implemented Zicsr subset and the machine-mode trap registers.

use serde::{Deserialize, Serialize};

use super::inst::{DecodedInstruction, Mnemonic};
use super::trap::TrapCause;
use crate::config::Xlen;

pub const MSTATUS: u16 = 0x300;
pub const MTVEC: u16 = 0x305;
pub const MEPC: u16 = 0x341;
pub const MCAUSE: u16 = 0x342;
pub const MCYCLE: u16 = 0xB00;
pub const MINSTRET: u16 = 0xB02;
pub const CYCLE: u16 = 0xC00;
pub const INSTRET: u16 = 0xC02;
pub const MHARTID: u16 = 0xF14;

pub const IMPLEMENTED: [u16; 9] =
    [MSTATUS, MTVEC, MEPC, MCAUSE, MCYCLE, MINSTRET, CYCLE, INSTRET, MHARTID];

const MSTATUS_MIE: u64 = 1 << 3;
const MSTATUS_MPIE: u64 = 1 << 7;
const MSTATUS_MPP: u64 = 3 << 11;

/// True for addresses whose reads depend on timing rather than on the
/// instruction stream.
pub fn is_timing_csr(addr: u16) -> bool {
    matches!(addr, MCYCLE | CYCLE)
}

/// Live counter values supplied by whoever owns the clock.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Cycles elapsed before the current one.
    pub cycle: u64,
    /// Instructions retired before the current one.
    pub instret: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsrFile {
    pub mstatus: u64,
    pub mtvec: u64,
    pub mepc: u64,
    pub mcause: u64,
    // mcycle/minstret writes are kept as offsets from the live counters.
    pub mcycle_offset: u64,
    pub minstret_offset: u64,
}

impl CsrFile {
    pub fn read(&self, addr: u16, counters: Counters, xlen: Xlen) -> Option<u64> {
        let v = match addr {
            MSTATUS => (self.mstatus & (MSTATUS_MIE | MSTATUS_MPIE)) | MSTATUS_MPP,
            MTVEC => self.mtvec,
            MEPC => self.mepc,
            MCAUSE => self.mcause,
            MCYCLE | CYCLE => counters.cycle.wrapping_add(self.mcycle_offset),
            MINSTRET | INSTRET => counters.instret.wrapping_add(self.minstret_offset),
            MHARTID => 0,
            _ => return None,
        };
        Some(xlen.trunc(v))
    }

    /// Write without access checks (callers check read-only addresses).
    fn write(&mut self, addr: u16, value: u64, counters: Counters, xlen: Xlen) {
        let value = xlen.trunc(value);
        match addr {
            MSTATUS => self.mstatus = value & (MSTATUS_MIE | MSTATUS_MPIE),
            // direct mode only
            MTVEC => self.mtvec = value & !3,
            MEPC => self.mepc = value & !3,
            MCAUSE => self.mcause = value,
            MCYCLE => self.mcycle_offset = value.wrapping_sub(counters.cycle),
            MINSTRET => self.minstret_offset = value.wrapping_sub(counters.instret),
            _ => unreachable!("write to unimplemented csr {addr:#x}"),
        }
    }

    /// Enter the trap handler: returns the handler address.
    pub fn enter_trap(&mut self, cause: &TrapCause, pc: u64) -> u64 {
        self.mepc = pc;
        self.mcause = cause.cause_code();
        let mie = self.mstatus & MSTATUS_MIE != 0;
        self.mstatus &= !(MSTATUS_MIE | MSTATUS_MPIE);
        if mie {
            self.mstatus |= MSTATUS_MPIE;
        }
        self.mtvec & !3
    }

    /// MRET: restore the interrupt enable and return the resume address.
    pub fn mret(&mut self) -> u64 {
        let mpie = self.mstatus & MSTATUS_MPIE != 0;
        self.mstatus &= !MSTATUS_MIE;
        if mpie {
            self.mstatus |= MSTATUS_MIE;
        }
        self.mstatus |= MSTATUS_MPIE;
        self.mepc
    }
}

/// Execute a CSR instruction. `src` is the rs1 value for the register forms
/// (ignored for immediate forms). Returns the old CSR value for rd; on a
/// trap nothing is modified.
pub fn exec_csr(
    inst: &DecodedInstruction,
    src: u64,
    csrs: &mut CsrFile,
    counters: Counters,
    xlen: Xlen,
) -> Result<u64, TrapCause> {
    use Mnemonic::*;
    let addr = inst.csr_addr();
    let illegal = TrapCause::illegal(inst.raw);
    let old = csrs.read(addr, counters, xlen).ok_or(illegal)?;
    let operand = match inst.mnemonic {
        CSRRWI | CSRRSI | CSRRCI => inst.rs1 as u64,
        _ => src,
    };
    let new = match inst.mnemonic {
        CSRRW | CSRRWI => Some(operand),
        CSRRS | CSRRSI => (inst.rs1 != 0).then_some(old | operand),
        CSRRC | CSRRCI => (inst.rs1 != 0).then_some(old & !operand),
        m => unreachable!("{m} is not a csr op"),
    };
    if let Some(v) = new {
        if addr >> 10 == 0b11 {
            return Err(illegal);
        }
        csrs.write(addr, v, counters, xlen);
    }
    Ok(old)
}
