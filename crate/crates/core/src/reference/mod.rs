//! One-instruction-per-step functional model, used as the oracle for the
//! pipeline. Slow and simple on purpose; it shares all instruction
//! semantics with the pipeline through [`crate::isa::execute`].

mod lockstep;

pub use lockstep::{
    lockstep_compare, lockstep_with, LockstepDivergence, LockstepError, LockstepOptions, LockstepReport, LockstepRun,
};

use crate::config::CoreConfig;
use crate::error::LoadError;
use crate::image::{CommitEvent, ProgramImage, Retirement, RunOutcome};
use crate::isa::csr::is_timing_csr;
use crate::isa::{decode, execute, Control, Counters, TimingClass, TrapCause};
use crate::machine::{MachineState, TrapLoopDetector};
use crate::memory::{MemoryMap, StoreEffect};

pub struct RefExecutor {
    pub config: CoreConfig,
    pub state: MachineState,
    retired: u64,
    traps: TrapLoopDetector,
    outcome: Option<RunOutcome>,
}

impl RefExecutor {
    pub fn new(config: CoreConfig, map: MemoryMap, image: &ProgramImage) -> Result<Self, LoadError> {
        let mut state = MachineState::new(config.xlen, map);
        state.memory.load_image(&image.segments)?;
        state.memory.set_tohost(image.tohost);
        state.pc = image.entry;
        Ok(RefExecutor { config, state, retired: 0, traps: TrapLoopDetector::default(), outcome: None })
    }

    pub fn retired(&self) -> u64 {
        self.retired
    }

    pub fn outcome(&self) -> Option<RunOutcome> {
        self.outcome
    }

    /// Fetch, decode, execute and retire (or trap on) one instruction.
    /// Returns `None` once the run has stopped.
    pub fn ref_step(&mut self) -> Option<CommitEvent> {
        if self.outcome.is_some() {
            return None;
        }
        let xlen = self.config.xlen;
        let pc = self.state.pc;
        let Some(raw) = self.state.memory.fetch(pc) else {
            self.outcome = Some(RunOutcome::UnmappedFetch { pc });
            return None;
        };
        let inst = match decode(raw, &self.config) {
            Ok(i) => i,
            Err(cause) => return self.trap(pc, cause),
        };
        let [s1, s2] = inst.sources();
        let a = s1.map_or(0, |r| self.state.reg(r));
        let b = s2.map_or(0, |r| self.state.reg(r));
        // One cycle per retired instruction.
        let counters = Counters { cycle: self.retired, instret: self.retired };
        let ex = execute(&inst, pc, a, b, &mut self.state.csrs, counters, xlen);

        let mut value = ex.value;
        let mut exit = None;
        if let Some(req) = ex.mem {
            match req.store {
                Some(v) => match self.state.memory.store(req.addr, req.width, v) {
                    Ok(StoreEffect::Exit(code)) => exit = Some(code),
                    Ok(_) => {}
                    Err(cause) => return self.trap(pc, cause),
                },
                None => match self.state.memory.load(req.addr, req.width, req.signed, xlen) {
                    Ok(v) => value = Some(v),
                    Err(cause) => return self.trap(pc, cause),
                },
            }
        }
        let next = match ex.control {
            Control::Next => xlen.trunc(pc.wrapping_add(4)),
            Control::Jump(t) => t,
            Control::Trap(cause) => return self.trap(pc, cause),
            Control::Mret => self.state.csrs.mret(),
        };
        let rd = inst.dest().zip(value);
        if let Some((r, v)) = rd {
            self.state.set_reg(r, v);
        }
        self.state.pc = next;
        self.retired += 1;
        self.traps.retired();
        if let Some(code) = exit {
            self.outcome = Some(RunOutcome::Exited { code });
        }
        let timing_read = inst.timing_class == TimingClass::Csr && is_timing_csr(inst.csr_addr());
        Some(CommitEvent::Retire(Retirement {
            pc,
            raw,
            rd: rd.map(|(r, v)| (r, xlen.trunc(v))),
            timing_read,
            exit,
        }))
    }

    fn trap(&mut self, pc: u64, cause: TrapCause) -> Option<CommitEvent> {
        self.state.pc = pc;
        self.state.raise_trap(&cause);
        if self.traps.trapped(pc, &cause, self.state.pc) {
            self.outcome = Some(RunOutcome::TrapLoop { pc, cause: cause.cause_code() });
        }
        Some(CommitEvent::Trap { pc, cause })
    }

    /// Step until the program stops or `max_steps` events have been taken.
    pub fn run(&mut self, max_steps: u64) -> RunOutcome {
        let mut steps = 0;
        while self.outcome.is_none() {
            if steps == max_steps {
                return RunOutcome::CycleLimit { limit: max_steps };
            }
            self.ref_step();
            steps += 1;
        }
        self.outcome.unwrap()
    }
}
