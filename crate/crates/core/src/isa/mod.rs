//! RV32I/RV64I with M and a minimal Zicsr subset.

pub mod alu;
pub mod csr;
pub mod decode;
pub mod exec;
pub mod inst;
pub mod muldiv;
pub mod roster;
pub mod trap;

pub use alu::exec_alu;
pub use csr::{exec_csr, Counters, CsrFile};
pub use decode::decode;
pub use exec::{execute, Control, Executed, MemRequest};
pub use inst::{DecodedInstruction, Mnemonic, TimingClass};
pub use muldiv::{exec_div, exec_mul, restoring_divide, restoring_divide_signed};
pub use roster::instruction_roster;
pub use trap::{TrapCause, TrapKind};
