use std::fmt;

use serde::Serialize;

use crate::config::Depth;
use crate::isa::TimingClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StageName {
    IF,
    IO,
    ID,
    EXR,
    EX,
    BR,
    MEM,
    WB,
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Stage layout of one pipeline depth, with the indices the engine keys on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StagePlan {
    pub depth: Depth,
    pub stage_names: Vec<StageName>,
    /// Decode; JAL and predicted-taken branches redirect fetch from here.
    pub decode: usize,
    /// Operands are read (and forwarded) here.
    pub resolve: usize,
    pub execute: usize,
    /// Conditional branches, traps and MRET take effect here.
    pub branch_resolve: usize,
    /// JALR redirects fetch from here.
    pub jalr_resolve: usize,
    pub mem: usize,
    pub writeback: usize,
}

impl StagePlan {
    pub fn new(depth: Depth) -> Self {
        use StageName::*;
        let names = match depth.stages() {
            5 => vec![IF, ID, EX, MEM, WB],
            6 => vec![IF, ID, EX, BR, MEM, WB],
            7 => vec![IF, IO, ID, EX, BR, MEM, WB],
            8 => vec![IF, IO, ID, EXR, EX, BR, MEM, WB],
            n => unreachable!("depth {n}"),
        };
        let at = |s: StageName| names.iter().position(|&n| n == s);
        let execute = at(EX).unwrap();
        let branch_resolve = at(BR).unwrap_or(execute);
        let jalr_resolve = if depth.stages() >= 7 { branch_resolve } else { execute };
        StagePlan {
            depth,
            decode: at(ID).unwrap(),
            resolve: at(EXR).unwrap_or(execute),
            execute,
            branch_resolve,
            jalr_resolve,
            mem: at(MEM).unwrap(),
            writeback: at(WB).unwrap(),
            stage_names: names,
        }
    }

    pub fn len(&self) -> usize {
        self.stage_names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bubbles left behind by a mispredicted branch: every stage younger
    /// than the resolving one is refilled.
    pub fn mispredict_flush_cycles(&self) -> u32 {
        self.branch_resolve as u32
    }

    /// Bubbles behind a redirect from decode.
    pub fn frontend_refill_cycles(&self) -> u32 {
        self.decode as u32
    }

    pub fn jalr_redirect_cycles(&self) -> u32 {
        self.jalr_resolve as u32
    }

    /// Stage whose load is held for a store in MEM, if the data memory is
    /// synchronous at this depth.
    pub fn write_done_stage(&self) -> Option<usize> {
        (self.depth.stages() >= 7).then_some(self.mem - 1)
    }
}

/// Earliest stage at which a producer's result can be forwarded into the
/// resolve stage, per producer class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HazardTable {
    pub resolve: usize,
    /// Everything computed in EX.
    pub ready_execute: usize,
    pub ready_load: usize,
}

impl HazardTable {
    pub fn new(plan: &StagePlan) -> Self {
        // A five-stage core has asynchronous memory read in MEM but only
        // bypasses load data from WB; deeper cores forward straight out of MEM.
        let ready_load = if plan.depth == Depth::FIVE { plan.writeback } else { plan.mem };
        HazardTable { resolve: plan.resolve, ready_execute: plan.execute + 1, ready_load }
    }

    pub fn ready_stage(&self, producer: TimingClass) -> usize {
        match producer {
            TimingClass::Load => self.ready_load,
            _ => self.ready_execute,
        }
    }

    /// Producer-to-consumer distance (in instructions) needed to avoid a stall.
    pub fn required_lead(&self, producer: TimingClass) -> u32 {
        (self.ready_stage(producer) - self.resolve) as u32
    }

    /// Stall cycles for a consumer `distance` instructions behind its producer.
    pub fn stalls(&self, producer: TimingClass, distance: u32) -> u32 {
        self.required_lead(producer).saturating_sub(distance)
    }
}
