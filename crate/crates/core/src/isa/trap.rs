use std::fmt;

use serde::{Deserialize, Serialize};

/// Machine-mode exception cause codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrapKind {
    InstructionAddressMisaligned,
    IllegalInstruction,
    Breakpoint,
    LoadAddressMisaligned,
    LoadAccessFault,
    StoreAddressMisaligned,
    StoreAccessFault,
    EcallFromM,
}

impl TrapKind {
    pub fn code(self) -> u64 {
        match self {
            TrapKind::InstructionAddressMisaligned => 0,
            TrapKind::IllegalInstruction => 2,
            TrapKind::Breakpoint => 3,
            TrapKind::LoadAddressMisaligned => 4,
            TrapKind::LoadAccessFault => 5,
            TrapKind::StoreAddressMisaligned => 6,
            TrapKind::StoreAccessFault => 7,
            TrapKind::EcallFromM => 11,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapCause {
    pub kind: TrapKind,
    /// Faulting address or instruction bits.
    pub tval: u64,
}

impl TrapCause {
    pub fn new(kind: TrapKind, tval: u64) -> Self {
        TrapCause { kind, tval }
    }

    pub fn illegal(raw: u32) -> Self {
        TrapCause::new(TrapKind::IllegalInstruction, raw as u64)
    }

    pub fn cause_code(&self) -> u64 {
        self.kind.code()
    }
}

impl fmt::Display for TrapCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} (cause {}, tval {:#x})", self.kind, self.cause_code(), self.tval)
    }
}
