//! Differential comparison of the pipeline against the reference executor.

use std::fmt;

use serde::Serialize;

use super::RefExecutor;
use crate::config::{CoreConfig, Depth, TimingOptions};
use crate::error::LoadError;
use crate::image::{CommitEvent, ProgramImage, RunOutcome};
use crate::machine::{ArchSnapshot, MachineState};
use crate::memory::MemoryMap;
use crate::pipeline::{Fault, Pipeline};

/// First point at which the two models disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LockstepDivergence {
    pub variant: String,
    pub depth: u8,
    /// Index of the retirement or trap event being compared.
    pub step: u64,
    pub pc: u64,
    /// What differed: "event", "registers", "pc", "csrs", "memory", "uart",
    /// "exit_code" or "outcome".
    pub what: String,
    pub expected: String,
    pub actual: String,
    pub reference: ArchSnapshot,
    pub pipeline: ArchSnapshot,
}

impl fmt::Display for LockstepDivergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} diverged at step {} (pc {:#x}): {} expected {} got {}",
            self.variant, self.step, self.pc, self.what, self.expected, self.actual
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LockstepError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0}")]
    Diverged(Box<LockstepDivergence>),
}

impl LockstepError {
    pub fn divergence(&self) -> Option<&LockstepDivergence> {
        match self {
            LockstepError::Diverged(d) => Some(d),
            LockstepError::Load(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LockstepRun {
    pub variant: String,
    pub depth: u8,
    pub retired: u64,
    pub cycles: u64,
    pub outcome: RunOutcome,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LockstepReport {
    pub runs: Vec<LockstepRun>,
}

#[derive(Clone, Debug)]
pub struct LockstepOptions {
    pub map: MemoryMap,
    pub timing: TimingOptions,
    pub max_cycles: u64,
    #[doc(hidden)]
    pub fault: Fault,
}

impl Default for LockstepOptions {
    fn default() -> Self {
        LockstepOptions {
            map: MemoryMap::default(),
            timing: TimingOptions::default(),
            max_cycles: 10_000_000,
            fault: Fault::None,
        }
    }
}

/// Run `image` on the reference executor and on the pipeline at each of
/// `depths` (width and ISA taken from `config`), comparing at every
/// retirement and at exit.
pub fn lockstep_compare(
    image: &ProgramImage,
    config: CoreConfig,
    depths: &[Depth],
) -> Result<LockstepReport, LockstepError> {
    lockstep_with(image, config, depths, &LockstepOptions::default())
}

pub fn lockstep_with(
    image: &ProgramImage,
    config: CoreConfig,
    depths: &[Depth],
    opts: &LockstepOptions,
) -> Result<LockstepReport, LockstepError> {
    let mut report = LockstepReport::default();
    for &depth in depths {
        let cfg = CoreConfig::unofficial(config.xlen, config.isa, depth);
        report.runs.push(compare_one(image, cfg, opts)?);
    }
    Ok(report)
}

struct Cmp<'a> {
    cfg: CoreConfig,
    step: u64,
    reference: &'a MachineState,
    pipeline: &'a MachineState,
}

impl Cmp<'_> {
    fn diverge(&self, pc: u64, what: &str, expected: impl fmt::Debug, actual: impl fmt::Debug) -> LockstepError {
        LockstepError::Diverged(Box::new(LockstepDivergence {
            variant: self.cfg.variant_name(),
            depth: self.cfg.depth.into(),
            step: self.step,
            pc,
            what: what.to_string(),
            expected: format!("{expected:x?}"),
            actual: format!("{actual:x?}"),
            reference: self.reference.snapshot(),
            pipeline: self.pipeline.snapshot(),
        }))
    }

    fn registers(&self, pc: u64) -> Result<(), LockstepError> {
        let (a, b) = (self.reference.regs(), self.pipeline.regs());
        if let Some(r) = (0..32).find(|&r| a[r] != b[r]) {
            return Err(self.diverge(pc, "registers", (r, a[r]), (r, b[r])));
        }
        if self.reference.pc != self.pipeline.pc {
            return Err(self.diverge(pc, "pc", self.reference.pc, self.pipeline.pc));
        }
        Ok(())
    }

    fn final_state(&self, pc: u64) -> Result<(), LockstepError> {
        self.registers(pc)?;
        let (a, b) = (self.reference, self.pipeline);
        let csrs = |m: &MachineState| (m.csrs.mstatus, m.csrs.mtvec, m.csrs.mepc, m.csrs.mcause);
        if csrs(a) != csrs(b) {
            return Err(self.diverge(pc, "csrs", csrs(a), csrs(b)));
        }
        for (name, x, y) in [("imem", a.memory.imem(), b.memory.imem()), ("dmem", a.memory.dmem(), b.memory.dmem())] {
            if let Some(i) = (0..x.len()).find(|&i| x[i] != y[i]) {
                return Err(self.diverge(pc, "memory", (name, i, x[i]), (name, i, y[i])));
            }
        }
        if a.memory.uart_output() != b.memory.uart_output() {
            return Err(self.diverge(pc, "uart", a.memory.uart_output(), b.memory.uart_output()));
        }
        if a.memory.exit_code() != b.memory.exit_code() {
            return Err(self.diverge(pc, "exit_code", a.memory.exit_code(), b.memory.exit_code()));
        }
        Ok(())
    }
}

fn compare_one(image: &ProgramImage, cfg: CoreConfig, opts: &LockstepOptions) -> Result<LockstepRun, LockstepError> {
    let mut r = RefExecutor::new(cfg, opts.map.clone(), image)?;
    let mut p = Pipeline::new(cfg, opts.timing.clone(), opts.map.clone(), image)?;
    p.record_events();
    p.inject_fault(opts.fault);
    let mut step = 0u64;
    let mut last_pc = image.entry;
    loop {
        if p.cycles() >= opts.max_cycles {
            break;
        }
        let running = p.step_cycle();
        for ev in p.drain_events() {
            let Some(mut expected) = r.ref_step() else {
                let cmp = Cmp { cfg, step, reference: &r.state, pipeline: &p.state };
                return Err(cmp.diverge(last_pc, "event", r.outcome(), ev));
            };
            // Timing counters legitimately differ: adopt the pipeline's value.
            if let (CommitEvent::Retire(want), CommitEvent::Retire(got)) = (&mut expected, &ev) {
                if want.timing_read && got.timing_read && want.pc == got.pc {
                    if let (Some((ra, _)), Some((rb, vb))) = (want.rd, got.rd) {
                        if ra == rb {
                            want.rd = Some((rb, vb));
                            r.state.set_reg(rb, vb);
                        }
                    }
                }
            }
            let pc = match ev {
                CommitEvent::Retire(x) => x.pc,
                CommitEvent::Trap { pc, .. } => pc,
            };
            last_pc = pc;
            let cmp = Cmp { cfg, step, reference: &r.state, pipeline: &p.state };
            if expected != ev {
                return Err(cmp.diverge(pc, "event", expected, ev));
            }
            cmp.registers(pc)?;
            step += 1;
        }
        if !running {
            break;
        }
    }

    let outcome = match p.outcome() {
        Some(o) => o,
        None => RunOutcome::CycleLimit { limit: opts.max_cycles },
    };
    if !matches!(outcome, RunOutcome::CycleLimit { .. }) {
        if r.outcome().is_none() {
            if let Some(extra) = r.ref_step() {
                let cmp = Cmp { cfg, step, reference: &r.state, pipeline: &p.state };
                return Err(cmp.diverge(last_pc, "event", extra, outcome));
            }
        }
        let cmp = Cmp { cfg, step, reference: &r.state, pipeline: &p.state };
        if r.outcome() != Some(outcome) {
            return Err(cmp.diverge(last_pc, "outcome", r.outcome(), outcome));
        }
        cmp.final_state(last_pc)?;
    }
    let stats = p.stats();
    if stats.instructions_retired != r.retired() {
        let cmp = Cmp { cfg, step, reference: &r.state, pipeline: &p.state };
        return Err(cmp.diverge(last_pc, "retired", r.retired(), stats.instructions_retired));
    }
    Ok(LockstepRun {
        variant: cfg.variant_name(),
        depth: cfg.depth.into(),
        retired: stats.instructions_retired,
        cycles: stats.cycles,
        outcome,
    })
}
