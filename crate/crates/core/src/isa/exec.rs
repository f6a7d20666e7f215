//! Shared instruction semantics. Both the pipeline model and the reference
//! executor go through [`execute`]; they differ only in when the memory
//! request and the control transfer are applied.

use super::alu::{branch_taken, exec_alu};
use super::csr::{exec_csr, Counters, CsrFile};
use super::inst::{DecodedInstruction, Mnemonic, TimingClass};
use super::muldiv::{exec_div, exec_mul};
use super::trap::{TrapCause, TrapKind};
use crate::config::Xlen;
use crate::memory::AccessWidth;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemRequest {
    pub addr: u64,
    pub width: AccessWidth,
    /// Sign-extend loaded data.
    pub signed: bool,
    /// Some for stores.
    pub store: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    /// Fall through to pc + 4.
    Next,
    /// Taken branch or jump.
    Jump(u64),
    Trap(TrapCause),
    Mret,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Executed {
    /// Destination value, known at execute time (None for loads).
    pub value: Option<u64>,
    pub mem: Option<MemRequest>,
    pub control: Control,
    /// Branch outcome, for conditional branches only.
    pub taken: Option<bool>,
}

impl Executed {
    fn value(v: u64) -> Self {
        Executed { value: Some(v), mem: None, control: Control::Next, taken: None }
    }

    fn control(c: Control) -> Self {
        Executed { value: None, mem: None, control: c, taken: None }
    }
}

pub fn load_shape(m: Mnemonic) -> (AccessWidth, bool) {
    use Mnemonic::*;
    match m {
        LB => (AccessWidth::B, true),
        LH => (AccessWidth::H, true),
        LW => (AccessWidth::W, true),
        LBU => (AccessWidth::B, false),
        LHU => (AccessWidth::H, false),
        LWU => (AccessWidth::W, false),
        LD => (AccessWidth::D, false),
        SB => (AccessWidth::B, false),
        SH => (AccessWidth::H, false),
        SW => (AccessWidth::W, false),
        SD => (AccessWidth::D, false),
        _ => unreachable!("{m} is not a memory op"),
    }
}

fn jump_target(target: u64) -> Control {
    if !target.is_multiple_of(4) {
        Control::Trap(TrapCause::new(TrapKind::InstructionAddressMisaligned, target))
    } else {
        Control::Jump(target)
    }
}

/// Execute `inst` at `pc` with source operands `a` (rs1) and `b` (rs2).
/// CSR side effects are applied to `csrs` immediately; memory accesses are
/// returned as a request for the caller to perform.
pub fn execute(
    inst: &DecodedInstruction,
    pc: u64,
    a: u64,
    b: u64,
    csrs: &mut CsrFile,
    counters: Counters,
    xlen: Xlen,
) -> Executed {
    let link = xlen.trunc(pc.wrapping_add(4));
    match inst.timing_class {
        TimingClass::Alu => Executed::value(exec_alu(inst, a, b, pc, xlen)),
        TimingClass::Mul => Executed::value(exec_mul(inst, a, b, xlen)),
        TimingClass::Div => Executed::value(exec_div(inst, a, b, xlen)),
        TimingClass::Load | TimingClass::Store => {
            let addr = xlen.trunc(a.wrapping_add(inst.imm as u64));
            let (width, signed) = load_shape(inst.mnemonic);
            let store = (inst.timing_class == TimingClass::Store).then_some(b);
            if !addr.is_multiple_of(width.bytes()) {
                let kind = if store.is_some() {
                    TrapKind::StoreAddressMisaligned
                } else {
                    TrapKind::LoadAddressMisaligned
                };
                return Executed::control(Control::Trap(TrapCause::new(kind, addr)));
            }
            Executed {
                value: None,
                mem: Some(MemRequest { addr, width, signed, store }),
                control: Control::Next,
                taken: None,
            }
        }
        TimingClass::Branch => {
            let taken = branch_taken(inst.mnemonic, a, b, xlen);
            let control = if taken {
                jump_target(xlen.trunc(pc.wrapping_add(inst.imm as u64)))
            } else {
                Control::Next
            };
            Executed { value: None, mem: None, control, taken: Some(taken) }
        }
        TimingClass::JumpDirect => {
            let control = jump_target(xlen.trunc(pc.wrapping_add(inst.imm as u64)));
            Executed { value: Some(link), mem: None, control, taken: None }
        }
        TimingClass::JumpIndirect => {
            let control = jump_target(xlen.trunc(a.wrapping_add(inst.imm as u64)) & !1);
            Executed { value: Some(link), mem: None, control, taken: None }
        }
        TimingClass::Csr => match exec_csr(inst, a, csrs, counters, xlen) {
            Ok(old) => Executed::value(old),
            Err(t) => Executed::control(Control::Trap(t)),
        },
        TimingClass::System => match inst.mnemonic {
            Mnemonic::FENCE | Mnemonic::FENCE_I => Executed::control(Control::Next),
            Mnemonic::ECALL => Executed::control(Control::Trap(TrapCause::new(TrapKind::EcallFromM, 0))),
            Mnemonic::EBREAK => Executed::control(Control::Trap(TrapCause::new(TrapKind::Breakpoint, pc))),
            Mnemonic::MRET => Executed::control(Control::Mret),
            m => unreachable!("{m} is not a system op"),
        },
    }
}
