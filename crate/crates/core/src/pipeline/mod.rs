//! Depth-parameterized in-order pipeline timing.

mod engine;
pub mod plan;
pub mod predictor;
pub mod stats;

pub use engine::{charge_multicycle, charge_write_done, simulate, BubbleCause, Fault, Pipeline, SimResult, TraceRow};
pub use plan::{HazardTable, StageName, StagePlan};
pub use predictor::BranchPredictor;
pub use stats::{RunStats, StallBreakdown};
