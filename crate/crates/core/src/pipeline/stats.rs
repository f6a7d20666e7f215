use serde::{Deserialize, Serialize};

/// Stall cycles by cause. Each counts bubbles of that cause that reached
/// writeback.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StallBreakdown {
    pub load_use: u64,
    pub execution_use: u64,
    pub mul_busy: u64,
    pub div_busy: u64,
    pub write_done: u64,
    pub frontend_refill: u64,
}

impl StallBreakdown {
    pub fn total(&self) -> u64 {
        self.load_use + self.execution_use + self.mul_busy + self.div_busy + self.write_done + self.frontend_refill
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub cycles: u64,
    pub instructions_retired: u64,
    pub stall_cycles: StallBreakdown,
    /// Bubbles from mispredictions, JALR redirects, traps and MRET.
    pub flush_cycles: u64,
    /// Empty writeback cycles while the pipeline first fills.
    pub fill_cycles: u64,
    pub branches: u64,
    pub mispredictions: u64,
    pub traps: u64,
    pub ipc: f64,
}

impl RunStats {
    pub fn ipc(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.instructions_retired as f64 / self.cycles as f64
        }
    }

    pub fn mispredict_rate(&self) -> f64 {
        if self.branches == 0 {
            0.0
        } else {
            self.mispredictions as f64 / self.branches as f64
        }
    }

    /// Every cycle is either a retirement, a fill cycle, a stall or a flush.
    pub fn is_conserved(&self) -> bool {
        self.cycles == self.fill_cycles + self.instructions_retired + self.stall_cycles.total() + self.flush_cycles
    }
}
