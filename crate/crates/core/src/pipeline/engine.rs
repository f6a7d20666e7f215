use std::fmt;
use std::mem;

use serde::Serialize;

use super::plan::{HazardTable, StagePlan};
use super::predictor::BranchPredictor;
use super::stats::RunStats;
use crate::config::{CoreConfig, TimingOptions, Xlen};
use crate::error::LoadError;
use crate::image::{CommitEvent, ProgramImage, Retirement, RunOutcome};
use crate::isa::csr::is_timing_csr;
use crate::isa::muldiv::div_iterations;
use crate::isa::{self, decode, Control, Counters, DecodedInstruction, MemRequest, TimingClass, TrapCause};
use crate::machine::{MachineState, TrapLoopDetector};
use crate::memory::MemoryMap;

/// What an empty stage slot is standing in for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BubbleCause {
    Fill,
    LoadUse,
    ExecutionUse,
    MulBusy,
    DivBusy,
    WriteDone,
    FrontendRefill,
    Flush,
    /// Fetch has stopped or the slot is about to be refilled.
    Idle,
}

impl fmt::Display for BubbleCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BubbleCause::Fill => "fill",
            BubbleCause::LoadUse => "load_use",
            BubbleCause::ExecutionUse => "exec_use",
            BubbleCause::MulBusy => "mul_busy",
            BubbleCause::DivBusy => "div_busy",
            BubbleCause::WriteDone => "write_done",
            BubbleCause::FrontendRefill => "refill",
            BubbleCause::Flush => "flush",
            BubbleCause::Idle => "-",
        };
        f.write_str(s)
    }
}

/// Deliberate timing-model bugs, for checking that lockstep comparison
/// catches them.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Operands always come from the register file.
    NoForwarding,
}

#[derive(Clone, Debug)]
struct Bubble {
    cause: BubbleCause,
    /// A trap taken by the instruction this bubble replaced: (pc, cause, handler).
    trap: Option<(u64, TrapCause, u64)>,
    /// The run ends when this bubble reaches writeback.
    stop: Option<RunOutcome>,
}

#[derive(Clone, Debug)]
struct InFlight {
    pc: u64,
    raw: u32,
    decoded: Result<DecodedInstruction, TrapCause>,
    fetch_fault: bool,
    predicted_taken: bool,
    /// Address fetched after this instruction.
    fetched_next: u64,
    /// Architectural successor, known once executed.
    next_pc: u64,
    decode_done: bool,
    operands: Option<(u64, u64)>,
    executed: bool,
    mem_req: Option<MemRequest>,
    taken: Option<bool>,
    mret: bool,
    trap: Option<TrapCause>,
    busy: u32,
    busy_cause: BubbleCause,
    value: Option<u64>,
    resolved: bool,
    write_done_checked: bool,
    mem_done: bool,
    exit: Option<u64>,
}

impl InFlight {
    fn inst(&self) -> Option<&DecodedInstruction> {
        self.decoded.as_ref().ok()
    }

    fn label(&self) -> String {
        match (&self.decoded, self.fetch_fault) {
            (_, true) => format!("{:#x}:fetch-fault", self.pc),
            (Ok(d), _) => format!("{:#x}:{}", self.pc, d.mnemonic),
            (Err(_), _) => format!("{:#x}:illegal", self.pc),
        }
    }
}

#[derive(Clone, Debug)]
enum Slot {
    Bubble(Bubble),
    Inst(Box<InFlight>),
}

impl Slot {
    fn bubble(cause: BubbleCause) -> Slot {
        Slot::Bubble(Bubble { cause, trap: None, stop: None })
    }

    fn is_bubble(&self) -> bool {
        matches!(self, Slot::Bubble(_))
    }

    fn label(&self) -> String {
        match self {
            Slot::Bubble(b) => b.cause.to_string(),
            Slot::Inst(i) => i.label(),
        }
    }
}

/// Stage occupancy at the start of one cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub cycle: u64,
    pub stages: Vec<String>,
}

/// Extra cycles an instruction holds EX for, with the cause they are
/// charged to.
pub fn charge_multicycle(inst: &DecodedInstruction, xlen: Xlen, options: &TimingOptions) -> (u32, BubbleCause) {
    match inst.timing_class {
        TimingClass::Mul => (options.mul_latency.saturating_sub(1), BubbleCause::MulBusy),
        TimingClass::Div => (options.div_overhead + div_iterations(inst, xlen), BubbleCause::DivBusy),
        _ => (0, BubbleCause::Idle),
    }
}

/// Whether a load about to enter MEM behind `store` must wait a cycle.
pub fn charge_write_done(load: &MemRequest, store: &MemRequest, options: &TimingOptions) -> bool {
    if !options.write_done_address_compare {
        return true;
    }
    let (a0, a1) = (load.addr, load.addr + load.width.bytes());
    let (b0, b1) = (store.addr, store.addr + store.width.bytes());
    a0 < b1 && b0 < a1
}

/// One in-order core: stage slots, front end, predictor and counters
/// wrapped around the architectural state.
pub struct Pipeline {
    pub config: CoreConfig,
    pub options: TimingOptions,
    pub state: MachineState,
    plan: StagePlan,
    hazards: HazardTable,
    predictor: BranchPredictor,
    slots: Vec<Slot>,
    fetch_pc: u64,
    fetch_stopped: bool,
    stats: RunStats,
    traps: TrapLoopDetector,
    exit_pending: Option<u64>,
    outcome: Option<RunOutcome>,
    events: Option<Vec<CommitEvent>>,
    trace: Option<Vec<TraceRow>>,
    fault: Fault,
}

impl Pipeline {
    pub fn new(config: CoreConfig, options: TimingOptions, map: MemoryMap, image: &ProgramImage) -> Result<Self, LoadError> {
        let mut state = MachineState::new(config.xlen, map);
        state.memory.load_image(&image.segments)?;
        state.memory.set_tohost(image.tohost);
        state.pc = image.entry;
        let plan = StagePlan::new(config.depth);
        let hazards = HazardTable::new(&plan);
        let slots = (0..plan.len()).map(|_| Slot::bubble(BubbleCause::Fill)).collect();
        Ok(Pipeline {
            predictor: BranchPredictor::new(options.predictor_entries),
            config,
            options,
            state,
            plan,
            hazards,
            slots,
            fetch_pc: image.entry,
            fetch_stopped: false,
            stats: RunStats::default(),
            traps: TrapLoopDetector::default(),
            exit_pending: None,
            outcome: None,
            events: None,
            trace: None,
            fault: Fault::None,
        })
    }

    pub fn plan(&self) -> &StagePlan {
        &self.plan
    }

    pub fn hazards(&self) -> &HazardTable {
        &self.hazards
    }

    pub fn predictor(&self) -> &BranchPredictor {
        &self.predictor
    }

    pub fn stats(&self) -> RunStats {
        let mut s = self.stats.clone();
        s.ipc = s.ipc();
        s
    }

    pub fn outcome(&self) -> Option<RunOutcome> {
        self.outcome
    }

    pub fn cycles(&self) -> u64 {
        self.stats.cycles
    }

    /// Keep retirement and trap events for [`Pipeline::drain_events`].
    pub fn record_events(&mut self) {
        self.events.get_or_insert_with(Vec::new);
    }

    pub fn drain_events(&mut self) -> Vec<CommitEvent> {
        self.events.as_mut().map(mem::take).unwrap_or_default()
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<TraceRow> {
        self.trace.as_mut().map(mem::take).unwrap_or_default()
    }

    #[doc(hidden)]
    pub fn inject_fault(&mut self, fault: Fault) {
        self.fault = fault;
    }

    /// Run until the program stops or `max_cycles` cycles have elapsed.
    pub fn run(&mut self, max_cycles: u64) -> RunOutcome {
        loop {
            if let Some(o) = self.outcome {
                return o;
            }
            if self.stats.cycles >= max_cycles {
                return RunOutcome::CycleLimit { limit: max_cycles };
            }
            self.step_cycle();
        }
    }

    /// Advance one clock. Returns false once the run has stopped.
    pub fn step_cycle(&mut self) -> bool {
        if self.outcome.is_some() {
            return false;
        }
        let wb = self.plan.writeback;
        if let Slot::Bubble(Bubble { stop: Some(stop), trap, .. }) = &self.slots[wb] {
            let (stop, trap) = (*stop, *trap);
            if let Some((pc, cause, handler)) = trap {
                self.state.pc = handler;
                self.emit(CommitEvent::Trap { pc, cause });
            }
            self.outcome = Some(stop);
            return false;
        }
        if !self.fetch_stopped && self.slots[0].is_bubble() {
            self.slots[0] = self.fetch();
        }
        if let Some(t) = &mut self.trace {
            t.push(TraceRow { cycle: self.stats.cycles + 1, stages: self.slots.iter().map(Slot::label).collect() });
        }

        self.writeback();
        let mut stall: Option<(usize, BubbleCause)> = None;
        for s in (0..wb).rev() {
            if self.slots[s].is_bubble() {
                continue;
            }
            let Slot::Inst(inst) = mem::replace(&mut self.slots[s], Slot::bubble(BubbleCause::Idle)) else {
                unreachable!()
            };
            let (back, cause) = self.stage_work(s, inst);
            self.slots[s] = back;
            if let (Some(c), None) = (cause, stall) {
                stall = Some((s, c));
            }
        }
        self.advance(stall);

        self.stats.cycles += 1;
        if let Some(code) = self.exit_pending {
            self.outcome = Some(RunOutcome::Exited { code });
        }
        true
    }

    fn emit(&mut self, e: CommitEvent) {
        if let Some(v) = &mut self.events {
            v.push(e);
        }
    }

    fn fetch(&mut self) -> Slot {
        let pc = self.fetch_pc;
        let xlen = self.config.xlen;
        self.fetch_pc = xlen.trunc(pc.wrapping_add(4));
        let (raw, decoded, fetch_fault) = match self.state.memory.fetch(pc) {
            Some(raw) => (raw, decode(raw, &self.config), false),
            None => (0, Err(TrapCause::illegal(0)), true),
        };
        let predicted_taken =
            matches!(&decoded, Ok(d) if d.timing_class == TimingClass::Branch) && self.predictor.predict(pc);
        let next = xlen.trunc(pc.wrapping_add(4));
        Slot::Inst(Box::new(InFlight {
            pc,
            raw,
            decoded,
            fetch_fault,
            predicted_taken,
            fetched_next: next,
            next_pc: next,
            decode_done: false,
            operands: None,
            executed: false,
            mem_req: None,
            taken: None,
            mret: false,
            trap: None,
            busy: 0,
            busy_cause: BubbleCause::Idle,
            value: None,
            resolved: false,
            write_done_checked: false,
            mem_done: false,
            exit: None,
        }))
    }

    fn writeback(&mut self) {
        let wb = self.plan.writeback;
        match mem::replace(&mut self.slots[wb], Slot::bubble(BubbleCause::Idle)) {
            Slot::Inst(i) => {
                let d = i.inst().expect("only decoded instructions retire");
                let rd = d.dest().map(|r| (r, self.config.xlen.trunc(i.value.expect("result produced"))));
                if let Some((r, v)) = rd {
                    self.state.set_reg(r, v);
                }
                self.state.pc = i.next_pc;
                self.stats.instructions_retired += 1;
                let timing_read = d.timing_class == TimingClass::Csr && is_timing_csr(d.csr_addr());
                self.emit(CommitEvent::Retire(Retirement { pc: i.pc, raw: i.raw, rd, timing_read, exit: i.exit }));
                if i.exit.is_some() {
                    self.exit_pending = i.exit;
                }
            }
            Slot::Bubble(b) => {
                let s = &mut self.stats;
                match b.cause {
                    BubbleCause::Fill => s.fill_cycles += 1,
                    BubbleCause::LoadUse => s.stall_cycles.load_use += 1,
                    BubbleCause::ExecutionUse => s.stall_cycles.execution_use += 1,
                    BubbleCause::MulBusy => s.stall_cycles.mul_busy += 1,
                    BubbleCause::DivBusy => s.stall_cycles.div_busy += 1,
                    BubbleCause::WriteDone => s.stall_cycles.write_done += 1,
                    BubbleCause::FrontendRefill => s.stall_cycles.frontend_refill += 1,
                    BubbleCause::Flush | BubbleCause::Idle => s.flush_cycles += 1,
                }
                if let Some((pc, cause, handler)) = b.trap {
                    self.state.pc = handler;
                    self.emit(CommitEvent::Trap { pc, cause });
                }
            }
        }
    }

    /// Move every unstalled slot one stage on. Stages at and behind a stall
    /// hold, and a bubble tagged with the stall cause enters the stage ahead.
    fn advance(&mut self, stall: Option<(usize, BubbleCause)>) {
        for s in (0..self.slots.len()).rev() {
            let next = match stall {
                Some((h, _)) if s <= h => continue,
                Some((h, cause)) if s == h + 1 => Slot::bubble(cause),
                _ if s == 0 => Slot::bubble(BubbleCause::Idle),
                _ => mem::replace(&mut self.slots[s - 1], Slot::bubble(BubbleCause::Idle)),
            };
            self.slots[s] = next;
        }
    }

    /// Replace everything younger than stage `s` with bubbles.
    fn squash(&mut self, s: usize, cause: BubbleCause) {
        for slot in &mut self.slots[..s] {
            *slot = Slot::bubble(cause);
        }
    }

    fn redirect(&mut self, s: usize, target: u64, cause: BubbleCause) {
        self.squash(s, cause);
        self.fetch_pc = target;
    }

    /// Per-stage work for the instruction in slot `s`. Returns the slot's new
    /// contents and a stall cause if the instruction cannot leave the stage.
    fn stage_work(&mut self, s: usize, mut i: Box<InFlight>) -> (Slot, Option<BubbleCause>) {
        let p = &self.plan;
        let (decode, resolve, execute, jalr, branch, mem) =
            (p.decode, p.resolve, p.execute, p.jalr_resolve, p.branch_resolve, p.mem);
        let write_done = p.write_done_stage();

        if s == decode && !i.decode_done {
            i.decode_done = true;
            self.decode_redirect(s, &mut i);
        }
        if s == resolve && i.operands.is_none() {
            if let Some(cause) = self.resolve_hazards(s, &i) {
                return (Slot::Inst(i), Some(cause));
            }
            i.operands = Some(self.read_operands(s, &i));
        }
        if s == execute {
            if !i.executed {
                self.execute(s, &mut i);
            }
            if i.busy > 0 {
                i.busy -= 1;
                let cause = i.busy_cause;
                return (Slot::Inst(i), Some(cause));
            }
            let is_jalr = i.inst().is_some_and(|d| d.timing_class == TimingClass::JumpIndirect);
            if s == jalr && jalr != branch && is_jalr && i.trap.is_none() && i.next_pc != i.fetched_next {
                i.fetched_next = i.next_pc;
                self.redirect(s, i.next_pc, BubbleCause::Flush);
            }
        }
        if s == branch && !i.resolved {
            i.resolved = true;
            if let Some(replacement) = self.resolve_branch(s, &mut i) {
                return (replacement, None);
            }
        }
        if Some(s) == write_done && !i.write_done_checked {
            i.write_done_checked = true;
            if self.write_done_hazard(&i) {
                return (Slot::Inst(i), Some(BubbleCause::WriteDone));
            }
        }
        if s == mem && !i.mem_done {
            i.mem_done = true;
            self.memory_access(&mut i);
        }
        (Slot::Inst(i), None)
    }

    /// JAL and predicted-taken branches steer fetch from decode.
    fn decode_redirect(&mut self, s: usize, i: &mut InFlight) {
        let Some(d) = i.inst() else { return };
        let redirect = match d.timing_class {
            TimingClass::JumpDirect => true,
            TimingClass::Branch => i.predicted_taken,
            _ => false,
        };
        if !redirect {
            return;
        }
        let target = self.config.xlen.trunc(i.pc.wrapping_add(d.imm as u64));
        if target.is_multiple_of(4) {
            i.fetched_next = target;
            self.redirect(s, target, BubbleCause::FrontendRefill);
        }
    }

    /// Stall decision for the instruction about to read its operands: it
    /// waits while the nearest older writer of any source has not yet
    /// reached the stage its result is forwarded from.
    pub fn resolve_hazards_at(&self, s: usize, inst: &DecodedInstruction) -> Option<BubbleCause> {
        let wb = self.plan.writeback;
        let mut stall = None;
        for r in inst.sources().into_iter().flatten().filter(|&r| r != 0) {
            for k in s + 1..wb {
                let Slot::Inst(p) = &self.slots[k] else { continue };
                let Some(pd) = p.inst() else { continue };
                if pd.dest() != Some(r) {
                    continue;
                }
                if k < self.hazards.ready_stage(pd.timing_class) {
                    let cause = if pd.timing_class == TimingClass::Load {
                        BubbleCause::LoadUse
                    } else {
                        BubbleCause::ExecutionUse
                    };
                    if stall != Some(BubbleCause::LoadUse) {
                        stall = Some(cause);
                    }
                }
                break;
            }
        }
        stall
    }

    fn resolve_hazards(&self, s: usize, i: &InFlight) -> Option<BubbleCause> {
        i.inst().and_then(|d| self.resolve_hazards_at(s, d))
    }

    fn read_operands(&self, s: usize, i: &InFlight) -> (u64, u64) {
        let Some(d) = i.inst() else { return (0, 0) };
        let read = |r: Option<u8>| -> u64 {
            let Some(r) = r else { return 0 };
            if r == 0 {
                return 0;
            }
            if self.fault != Fault::NoForwarding {
                for slot in &self.slots[s + 1..] {
                    if let Slot::Inst(p) = slot {
                        if p.inst().and_then(|pd| pd.dest()) == Some(r) {
                            return p.value.unwrap_or(0);
                        }
                    }
                }
            }
            self.state.reg(r)
        };
        let [a, b] = d.sources();
        (read(a), read(b))
    }

    fn execute(&mut self, s: usize, i: &mut InFlight) {
        i.executed = true;
        let d = match &i.decoded {
            Ok(d) => *d,
            Err(cause) => {
                if !i.fetch_fault {
                    i.trap = Some(*cause);
                }
                return;
            }
        };
        let xlen = self.config.xlen;
        let (a, b) = i.operands.expect("operands read before execute");
        let older = self.slots[s + 1..self.plan.writeback].iter().filter(|x| !x.is_bubble()).count() as u64;
        let counters = Counters { cycle: self.stats.cycles, instret: self.stats.instructions_retired + older };
        let ex = isa::execute(&d, i.pc, a, b, &mut self.state.csrs, counters, xlen);
        i.value = ex.value;
        i.taken = ex.taken;
        match ex.control {
            Control::Next => {}
            Control::Jump(t) => i.next_pc = t,
            Control::Trap(cause) => i.trap = Some(cause),
            Control::Mret => i.mret = true,
        }
        if let Some(req) = ex.mem {
            match self.state.memory.check(req.addr, req.width, req.store.is_some()) {
                Ok(()) => i.mem_req = Some(req),
                Err(cause) => i.trap = Some(cause),
            }
        }
        let (busy, cause) = charge_multicycle(&d, xlen, &self.options);
        i.busy = busy;
        i.busy_cause = cause;
    }

    /// Branch-resolve stage: take traps, check predictions, and stop fetch
    /// behind a terminating store. Returns a replacement slot when the
    /// instruction leaves the pipeline here.
    fn resolve_branch(&mut self, s: usize, i: &mut InFlight) -> Option<Slot> {
        if i.fetch_fault {
            self.squash(s, BubbleCause::Idle);
            self.fetch_stopped = true;
            let stop = Some(RunOutcome::UnmappedFetch { pc: i.pc });
            return Some(Slot::Bubble(Bubble { cause: BubbleCause::Flush, trap: None, stop }));
        }
        if let Some(cause) = i.trap {
            let handler = self.state.csrs.enter_trap(&cause, i.pc);
            self.stats.traps += 1;
            let looping = self.traps.trapped(i.pc, &cause, handler);
            let mut bubble = Bubble { cause: BubbleCause::Flush, trap: Some((i.pc, cause, handler)), stop: None };
            if looping {
                self.squash(s, BubbleCause::Idle);
                self.fetch_stopped = true;
                bubble.stop = Some(RunOutcome::TrapLoop { pc: i.pc, cause: cause.cause_code() });
            } else {
                self.redirect(s, handler, BubbleCause::Flush);
            }
            return Some(Slot::Bubble(bubble));
        }
        self.traps.retired();
        if i.mret {
            i.next_pc = self.state.csrs.mret();
        }
        if let Some(taken) = i.taken {
            self.stats.branches += 1;
            self.predictor.update(i.pc, taken);
            if i.next_pc != i.fetched_next {
                self.stats.mispredictions += 1;
            }
        }
        if i.next_pc != i.fetched_next {
            i.fetched_next = i.next_pc;
            self.redirect(s, i.next_pc, BubbleCause::Flush);
        }
        if let Some(MemRequest { addr, width, store: Some(v), .. }) = i.mem_req {
            if self.state.memory.exit_effect(addr, width, v).is_some() {
                self.squash(s, BubbleCause::Idle);
                self.fetch_stopped = true;
            }
        }
        None
    }

    /// A load about to enter MEM right behind a store that occupies it.
    fn write_done_hazard(&self, i: &InFlight) -> bool {
        let Some(load) = i.mem_req.filter(|r| r.store.is_none()) else { return false };
        let Slot::Inst(st) = &self.slots[self.plan.mem] else { return false };
        match st.mem_req {
            Some(store) if store.store.is_some() => charge_write_done(&load, &store, &self.options),
            _ => false,
        }
    }

    fn memory_access(&mut self, i: &mut InFlight) {
        let Some(req) = i.mem_req else { return };
        let mem = &mut self.state.memory;
        match req.store {
            Some(v) => {
                if let crate::memory::StoreEffect::Exit(code) = mem.store(req.addr, req.width, v).expect("checked in EX") {
                    i.exit = Some(code);
                }
            }
            None => i.value = Some(mem.load(req.addr, req.width, req.signed, self.config.xlen).expect("checked in EX")),
        }
    }
}

impl fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pipeline")
            .field("config", &self.config.variant_name())
            .field("stages", &self.slots.iter().map(Slot::label).collect::<Vec<_>>())
            .field("stats", &self.stats)
            .finish()
    }
}

/// Result of a complete simulation.
#[derive(Clone, Debug)]
pub struct SimResult {
    pub stats: RunStats,
    pub outcome: RunOutcome,
    pub state: MachineState,
}

/// Load `image`, run it for at most `max_cycles`, and collect the results.
pub fn simulate(
    config: CoreConfig,
    options: TimingOptions,
    map: MemoryMap,
    image: &ProgramImage,
    max_cycles: u64,
) -> Result<SimResult, LoadError> {
    let mut p = Pipeline::new(config, options, map, image)?;
    let outcome = p.run(max_cycles);
    Ok(SimResult { stats: p.stats(), outcome, state: p.state })
}
