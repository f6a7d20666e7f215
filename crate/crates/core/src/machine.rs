//! Architectural state shared by the reference executor and the pipeline.

use serde::Serialize;

use crate::config::Xlen;
use crate::isa::{CsrFile, TrapCause};
use crate::memory::{Memory, MemoryMap};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState {
    pub xlen: Xlen,
    pub pc: u64,
    regs: [u64; 32],
    pub csrs: CsrFile,
    pub memory: Memory,
}

impl MachineState {
    pub fn new(xlen: Xlen, map: MemoryMap) -> Self {
        let pc = map.imem_base;
        MachineState { xlen, pc, regs: [0; 32], csrs: CsrFile::default(), memory: Memory::new(map) }
    }

    #[inline]
    pub fn reg(&self, r: u8) -> u64 {
        self.regs[r as usize]
    }

    /// Register write; writes to x0 are dropped.
    #[inline]
    pub fn set_reg(&mut self, r: u8, v: u64) {
        if r != 0 {
            self.regs[r as usize] = self.xlen.trunc(v);
        }
    }

    pub fn regs(&self) -> &[u64; 32] {
        &self.regs
    }

    /// Take a machine-mode trap at the current pc.
    pub fn raise_trap(&mut self, cause: &TrapCause) {
        self.pc = self.csrs.enter_trap(cause, self.pc);
    }

    /// MRET: resume at mepc.
    pub fn mret(&mut self) {
        self.pc = self.csrs.mret();
    }

    pub fn snapshot(&self) -> ArchSnapshot {
        ArchSnapshot {
            pc: self.pc,
            regs: self.regs.to_vec(),
            mstatus: self.csrs.mstatus,
            mtvec: self.csrs.mtvec,
            mepc: self.csrs.mepc,
            mcause: self.csrs.mcause,
            uart: String::from_utf8_lossy(self.memory.uart_output()).into_owned(),
            exit_code: self.memory.exit_code(),
        }
    }
}

/// Architectural summary used in reports and divergence messages.
/// Timing-dependent counters are excluded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArchSnapshot {
    pub pc: u64,
    pub regs: Vec<u64>,
    pub mstatus: u64,
    pub mtvec: u64,
    pub mepc: u64,
    pub mcause: u64,
    pub uart: String,
    pub exit_code: Option<u64>,
}

/// Detects a trap that re-enters itself without retiring anything.
#[derive(Clone, Debug, Default)]
pub(crate) struct TrapLoopDetector {
    last: Option<(u64, u64)>,
}

impl TrapLoopDetector {
    pub fn retired(&mut self) {
        self.last = None;
    }

    /// Returns true when this trap repeats the previous one with no
    /// retirement in between, or when the handler is the faulting pc.
    pub fn trapped(&mut self, pc: u64, cause: &TrapCause, handler: u64) -> bool {
        let key = (pc, cause.cause_code());
        let looping = handler == pc || self.last == Some(key);
        self.last = Some(key);
        looping
    }
}
