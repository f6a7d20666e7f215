use serde::{Deserialize, Serialize};

use crate::isa::TrapCause;

/// A loadable program: entry point plus memory segments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProgramImage {
    pub entry: u64,
    pub segments: Vec<(u64, Vec<u8>)>,
    /// Address of a `tohost` word, if the image provides one.
    pub tohost: Option<u64>,
}

impl ProgramImage {
    /// A flat binary placed at `base` with execution starting at `entry`.
    pub fn flat(base: u64, bytes: Vec<u8>, entry: u64) -> Self {
        ProgramImage { entry, segments: vec![(base, bytes)], tohost: None }
    }

    /// Code given as 32-bit words at `base`, entry at `base`.
    pub fn from_words(base: u64, words: &[u32]) -> Self {
        let bytes = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        ProgramImage::flat(base, bytes, base)
    }
}

/// Why a simulation stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunOutcome {
    /// The guest wrote to the exit device (or `tohost`).
    Exited { code: u64 },
    /// The cycle (or step) budget ran out.
    CycleLimit { limit: u64 },
    /// Execution reached a pc outside instruction memory.
    UnmappedFetch { pc: u64 },
    /// A trap kept re-entering itself.
    TrapLoop { pc: u64, cause: u64 },
}

impl RunOutcome {
    pub fn exit_code(&self) -> Option<u64> {
        match self {
            RunOutcome::Exited { code } => Some(*code),
            _ => None,
        }
    }
}

/// One retired instruction, as seen at the architectural boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Retirement {
    pub pc: u64,
    pub raw: u32,
    pub rd: Option<(u8, u64)>,
    /// The instruction read a timing-dependent CSR into `rd`.
    pub timing_read: bool,
    /// Exit code, when this instruction terminated the run.
    pub exit: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CommitEvent {
    Retire(Retirement),
    Trap { pc: u64, cause: TrapCause },
}
