//! Seeded generator of random, always-terminating test programs.
//!
//! Programs are built from items (single instructions or short fixed
//! sequences). Control flow only moves forward to item boundaries, except
//! for self-contained counted loops, so every program halts. Register
//! conventions: x28 loop counter, x29 trap-handler scratch, x30 data base,
//! x31 exit-device base. Code is never written.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asm::{self, Reg};
use crate::config::{Isa, Xlen};
use crate::image::ProgramImage;
use crate::isa::csr;
use crate::isa::Mnemonic::{self, *};

const LOOP: Reg = Reg::T3;
const SCRATCH: Reg = Reg::T4;
const DATA: Reg = Reg::T5;
const EXIT: Reg = Reg::T6;

#[derive(Clone, Debug)]
enum Item {
    Words(Vec<u32>),
    /// Conditional branch skipping forward `skip` items.
    Branch(Mnemonic, Reg, Reg, usize),
    /// JAL skipping forward `skip` items.
    Jal(Reg, usize),
    /// AUIPC + JALR skipping forward `skip` items.
    Jalr(Reg, Reg, usize),
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    xlen: Xlen,
    isa: Isa,
}

const ALU_RR: [Mnemonic; 10] = [ADD, SUB, SLL, SLT, SLTU, XOR, SRL, SRA, OR, AND];
const ALU_RI: [Mnemonic; 9] = [ADDI, SLTI, SLTIU, XORI, ORI, ANDI, SLLI, SRLI, SRAI];
const ALU_RR_W: [Mnemonic; 5] = [ADDW, SUBW, SLLW, SRLW, SRAW];
const ALU_RI_W: [Mnemonic; 4] = [ADDIW, SLLIW, SRLIW, SRAIW];
const MULDIV: [Mnemonic; 8] = [MUL, MULH, MULHSU, MULHU, DIV, DIVU, REM, REMU];
const MULDIV_W: [Mnemonic; 5] = [MULW, DIVW, DIVUW, REMW, REMUW];
const BRANCHES: [Mnemonic; 6] = [BEQ, BNE, BLT, BGE, BLTU, BGEU];
const CSRS_READ: [u16; 9] = [
    csr::MSTATUS,
    csr::MEPC,
    csr::MCAUSE,
    csr::MCYCLE,
    csr::MINSTRET,
    csr::CYCLE,
    csr::INSTRET,
    csr::MHARTID,
    csr::MTVEC,
];

impl Gen<'_> {
    /// Any general register the body may write.
    fn dst(&mut self) -> Reg {
        // Bias towards a few registers so dependencies are dense.
        if self.rng.gen_bool(0.6) {
            Reg::x(self.rng.gen_range(10..16))
        } else {
            Reg::x(self.rng.gen_range(1..28))
        }
    }

    fn src(&mut self) -> Reg {
        match self.rng.gen_range(0..10) {
            0 => Reg::ZERO,
            1 => DATA,
            2..=6 => Reg::x(self.rng.gen_range(10..16)),
            _ => Reg::x(self.rng.gen_range(1..28)),
        }
    }

    fn imm12(&mut self) -> i32 {
        match self.rng.gen_range(0..4) {
            0 => self.rng.gen_range(-4..4),
            1 => *[-2048, 2047, -1, 1].choose(self.rng).unwrap(),
            _ => self.rng.gen_range(-2048..2048),
        }
    }

    fn rv64(&self) -> bool {
        self.xlen == Xlen::X64
    }

    fn alu(&mut self) -> u32 {
        let (rd, a, b) = (self.dst(), self.src(), self.src());
        match self.rng.gen_range(0..7) {
            0 if self.rv64() => asm::op(*ALU_RR_W.choose(self.rng).unwrap(), rd, a, b),
            1 if self.rv64() => {
                let m = *ALU_RI_W.choose(self.rng).unwrap();
                let imm = if m == ADDIW { self.imm12() } else { self.rng.gen_range(0..32) };
                asm::op_imm(m, rd, a, imm)
            }
            2 => asm::lui(rd, self.rng.gen()),
            3 if self.rng.gen_bool(0.3) => asm::auipc(rd, self.rng.gen()),
            4 | 5 => {
                let m = *ALU_RI.choose(self.rng).unwrap();
                let imm = match m {
                    SLLI | SRLI | SRAI => self.rng.gen_range(0..self.xlen.bits() as i32),
                    _ => self.imm12(),
                };
                asm::op_imm(m, rd, a, imm)
            }
            _ => asm::op(*ALU_RR.choose(self.rng).unwrap(), rd, a, b),
        }
    }

    fn muldiv(&mut self) -> u32 {
        let (rd, a, b) = (self.dst(), self.src(), self.src());
        let m = if self.rv64() && self.rng.gen_bool(0.4) {
            *MULDIV_W.choose(self.rng).unwrap()
        } else {
            *MULDIV.choose(self.rng).unwrap()
        };
        asm::op(m, rd, a, b)
    }

    fn mem(&mut self) -> u32 {
        let mut widths = vec![(LB, SB, 1), (LH, SH, 2), (LW, SW, 4), (LBU, SB, 1), (LHU, SH, 2)];
        if self.rv64() {
            widths.extend([(LWU, SW, 4), (LD, SD, 8)]);
        }
        let (load, store, w) = *widths.choose(self.rng).unwrap();
        let mut off = self.rng.gen_range(0..256) * w;
        if self.rng.gen_bool(0.03) {
            off += 1; // misaligned for w > 1
        }
        match self.rng.gen_range(0..20) {
            // Unmapped or instruction-memory reads through x0.
            0 => asm::load(load, self.dst(), Reg::ZERO, *[-8, 0x40, -2048].choose(self.rng).unwrap()),
            1..=9 => asm::load(load, self.dst(), DATA, off),
            _ => asm::store(store, self.src(), DATA, off),
        }
    }

    fn csr(&mut self) -> u32 {
        let rd = self.dst();
        let addr = *CSRS_READ.choose(self.rng).unwrap();
        match self.rng.gen_range(0..10) {
            // Writes; mtvec stays pointed at the handler.
            0 => asm::csrrw(rd, *[csr::MCAUSE, csr::MEPC, csr::MCYCLE, csr::MINSTRET].choose(self.rng).unwrap(), self.src()),
            1 => asm::csrrsi(rd, csr::MSTATUS, 8),
            2 => asm::csrrci(rd, csr::MSTATUS, self.rng.gen_range(0..32)),
            // Unimplemented or read-only targets trap.
            3 => asm::csrrw(rd, *[0x340, csr::CYCLE, csr::MHARTID].choose(self.rng).unwrap(), self.src()),
            _ => asm::csrrs(rd, addr, Reg::ZERO),
        }
    }

    fn system(&mut self) -> u32 {
        match self.rng.gen_range(0..6) {
            0 => asm::ecall(),
            1 => asm::ebreak(),
            2 => asm::fence(),
            3 => 0x0000_100F, // fence.i
            4 => self.rng.gen::<u32>() | 0x7F, // reserved major opcode
            _ => 0,
        }
    }

    fn straight(&mut self) -> u32 {
        match self.rng.gen_range(0..100) {
            0..=44 => self.alu(),
            45..=69 => self.mem(),
            70..=79 if self.isa.has_m() => self.muldiv(),
            70..=79 => self.alu(),
            80..=89 => self.csr(),
            90..=93 => self.system(),
            _ => asm::nop(),
        }
    }

    fn item(&mut self) -> Item {
        match self.rng.gen_range(0..100) {
            0..=11 => {
                let m = *BRANCHES.choose(self.rng).unwrap();
                Item::Branch(m, self.src(), self.src(), self.rng.gen_range(1..4))
            }
            12..=14 => Item::Jal(self.dst(), self.rng.gen_range(1..4)),
            15..=17 => Item::Jalr(self.dst(), self.dst(), self.rng.gen_range(1..4)),
            18..=21 => {
                let n = self.rng.gen_range(1..6);
                let body: Vec<u32> = (0..self.rng.gen_range(1..5)).map(|_| self.straight()).collect();
                let mut w = vec![asm::addi(LOOP, Reg::ZERO, n)];
                w.extend(&body);
                w.push(asm::addi(LOOP, LOOP, -1));
                w.push(asm::bne(LOOP, Reg::ZERO, -4 * (body.len() as i32 + 1)));
                Item::Words(w)
            }
            _ => Item::Words(vec![self.straight()]),
        }
    }
}

/// Generate a random legal program of roughly `len` instructions for the
/// given width and ISA. Identical seeds give identical images.
pub fn random_program(seed: u64, xlen: Xlen, isa: Isa, len: usize) -> ProgramImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Gen { rng: &mut rng, xlen, isa };

    let mut items = Vec::new();
    let mut count = 0;
    while count < len {
        let it = g.item();
        count += match &it {
            Item::Words(w) => w.len(),
            Item::Jalr(..) => 2,
            _ => 1,
        };
        items.push(it);
    }

    // Prologue: exit base, data base, handler address into mtvec, then seed
    // a few registers with data.
    let prologue_len = 8;
    let mut words = vec![
        asm::lui(EXIT, 0x10000),
        asm::lui(DATA, 0x10),
        0, // lui SCRATCH, handler (patched below)
        0, // addi SCRATCH, SCRATCH, handler
        asm::csrrw(Reg::ZERO, csr::MTVEC, SCRATCH),
        asm::addi(Reg::A0, Reg::ZERO, g.rng.gen_range(-2048..2048)),
        asm::addi(Reg::A1, Reg::ZERO, g.rng.gen_range(-2048..2048)),
        asm::lui(Reg::A2, g.rng.gen()),
    ];
    debug_assert_eq!(words.len(), prologue_len);

    // Item start addresses (in words), plus the exit item at the end.
    let mut starts = Vec::with_capacity(items.len() + 1);
    let mut at = words.len();
    for it in &items {
        starts.push(at);
        at += match it {
            Item::Words(w) => w.len(),
            Item::Jalr(..) => 2,
            _ => 1,
        };
    }
    starts.push(at);
    let target = |k: usize, skip: usize| starts[(k + skip).min(items.len())];

    for (k, it) in items.iter().enumerate() {
        let here = words.len();
        match it {
            Item::Words(w) => words.extend(w),
            Item::Branch(m, a, b, skip) => words.push(asm::branch(*m, *a, *b, 4 * (target(k, *skip) - here) as i32)),
            Item::Jal(rd, skip) => words.push(asm::jal(*rd, 4 * (target(k, *skip) - here) as i32)),
            Item::Jalr(rd, tmp, skip) => {
                words.push(asm::auipc(*tmp, 0));
                words.push(asm::jalr(*rd, *tmp, 4 * (target(k, *skip) - here) as i32));
            }
        }
    }
    words.push(asm::sw(Reg::A0, EXIT, 8));

    // Handler: skip the faulting instruction.
    let handler = words.len();
    let h = 4 * handler as i32;
    let hi = (h + 0x800) >> 12;
    words[2] = asm::lui(SCRATCH, hi as u32);
    words[3] = asm::addi(SCRATCH, SCRATCH, h - (hi << 12));
    words.extend([
        asm::csrrs(SCRATCH, csr::MEPC, Reg::ZERO),
        asm::addi(SCRATCH, SCRATCH, 4),
        asm::csrrw(Reg::ZERO, csr::MEPC, SCRATCH),
        asm::mret(),
    ]);
    ProgramImage::from_words(0, &words)
}
