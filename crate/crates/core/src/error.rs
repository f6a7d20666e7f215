use thiserror::Error;

use crate::config::{Depth, Isa, Xlen};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("invalid xlen `{0}` (expected 32 or 64)")]
    BadXlen(String),
    #[error("invalid isa `{0}` (expected i or im)")]
    BadIsa(String),
    #[error("invalid pipeline depth {0} (expected 5..=8)")]
    BadDepth(u8),
    #[error("no official variant with xlen={xlen} isa={isa} depth={depth}")]
    NoSuchVariant { xlen: Xlen, isa: Isa, depth: Depth },
    #[error("unknown variant designation `{0}`")]
    UnknownVariant(String),
    #[error("invalid memory map: {0}")]
    BadMemoryMap(String),
    #[error("predictor size {0} is not a non-zero power of two")]
    BadPredictorSize(usize),
    #[error("config file: {0}")]
    File(String),
}

/// Simulator-level failure while preparing memory (not a guest trap).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoadError {
    #[error("segment at {addr:#x} (+{len} bytes) is outside the mapped memory regions")]
    OutOfRange { addr: u64, len: usize },
    #[error("segments at {a:#x} and {b:#x} overlap")]
    Overlap { a: u64, b: u64 },
}

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("malformed ELF: {0}")]
    Malformed(String),
    #[error("ELF class mismatch: image is {image}-bit, core is {core}-bit")]
    ClassMismatch { image: u32, core: u32 },
    #[error("ELF machine {0} is not RISC-V")]
    NotRiscv(u16),
    #[error("ELF is not little-endian")]
    BigEndian,
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("benchmark did not print a parseable score before exit")]
    NoScore,
    #[error("benchmark did not finish: {0}")]
    DidNotFinish(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("suite: {0}")]
    Suite(String),
}
