//! Cycle-accurate model of a family of in-order RISC-V cores: RV32 and
//! RV64, with or without the M extension, at pipeline depths 5 to 8.

pub mod asm;
pub mod config;
pub mod error;
pub mod harness;
pub mod image;
pub mod isa;
pub mod machine;
pub mod memory;
pub mod pipeline;
pub mod reference;
pub mod testgen;

pub use config::{CoreConfig, Depth, Isa, TimingOptions, Xlen};
pub use error::{BenchError, ConfigError, ImageError, LoadError};
pub use image::{CommitEvent, ProgramImage, Retirement, RunOutcome};
pub use isa::{decode, instruction_roster, DecodedInstruction, Mnemonic, TimingClass, TrapCause, TrapKind};
pub use machine::{ArchSnapshot, MachineState};
pub use memory::{AccessWidth, Memory, MemoryMap};
pub use pipeline::{simulate, BranchPredictor, HazardTable, Pipeline, RunStats, SimResult, StagePlan};
pub use reference::{lockstep_compare, LockstepDivergence, LockstepReport, RefExecutor};
pub use harness::{load_elf, run_benchmark, sweep, BenchResult, SweepReport};
