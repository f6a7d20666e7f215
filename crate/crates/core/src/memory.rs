//! Flat memory: separate instruction and data RAMs plus a small MMIO block
//! (UART transmitter and an exit device). Latency-free; timing lives in the
//! pipeline model.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::Xlen;
use crate::error::{ConfigError, LoadError};
use crate::isa::{TrapCause, TrapKind};

/// Size of the MMIO block in bytes.
pub const MMIO_SIZE: u64 = 0x10;
/// Write: low byte is appended to the UART stream.
pub const UART_TX: u64 = 0x0;
/// Read: bit 0 set when the transmitter is ready (always).
pub const UART_STATUS: u64 = 0x4;
/// Write: terminate the simulation with the written value as exit code.
pub const EXIT: u64 = 0x8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MemoryMap {
    pub imem_base: u64,
    pub imem_size: u64,
    pub dmem_base: u64,
    pub dmem_size: u64,
    pub mmio_base: u64,
}

impl Default for MemoryMap {
    fn default() -> Self {
        MemoryMap {
            imem_base: 0x0000_0000,
            imem_size: 0x1_0000,
            dmem_base: 0x0001_0000,
            dmem_size: 0x1_0000,
            mmio_base: 0x1000_0000,
        }
    }
}

impl MemoryMap {
    pub fn validate(&self, xlen: Xlen) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::BadMemoryMap(m.to_string()));
        for (name, size) in [("imem", self.imem_size), ("dmem", self.dmem_size)] {
            if !size.is_power_of_two() {
                return bad(&format!("{name} size {size:#x} is not a power of two"));
            }
        }
        let regions = [
            (self.imem_base, self.imem_size),
            (self.dmem_base, self.dmem_size),
            (self.mmio_base, MMIO_SIZE),
        ];
        let limit = xlen.mask() as u128 + 1;
        for &(base, size) in &regions {
            if base as u128 + size as u128 > limit {
                return bad(&format!("region at {base:#x} does not fit in the address space"));
            }
        }
        for (i, a) in regions.iter().enumerate() {
            for b in &regions[i + 1..] {
                if a.0 < b.0 + b.1 && b.0 < a.0 + a.1 {
                    return bad(&format!("regions at {:#x} and {:#x} overlap", a.0, b.0));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AccessWidth {
    B,
    H,
    W,
    D,
}

impl AccessWidth {
    pub fn bytes(self) -> u64 {
        match self {
            AccessWidth::B => 1,
            AccessWidth::H => 2,
            AccessWidth::W => 4,
            AccessWidth::D => 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Target {
    Imem(usize),
    Dmem(usize),
    Mmio(u64),
}

/// Side effect of a store beyond updating RAM.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoreEffect {
    None,
    Uart(u8),
    Exit(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Memory {
    map: MemoryMap,
    imem: Vec<u8>,
    dmem: Vec<u8>,
    uart: Vec<u8>,
    exit_code: Option<u64>,
    tohost: Option<u64>,
    echo: bool,
}

impl Memory {
    pub fn new(map: MemoryMap) -> Self {
        Memory {
            imem: vec![0; map.imem_size as usize],
            dmem: vec![0; map.dmem_size as usize],
            map,
            uart: Vec::new(),
            exit_code: None,
            tohost: None,
            echo: false,
        }
    }

    pub fn map(&self) -> &MemoryMap {
        &self.map
    }

    /// Echo UART bytes to standard output as they are written.
    pub fn set_echo(&mut self, echo: bool) {
        self.echo = echo;
    }

    /// Honour stores to a `tohost` word as an alternative exit protocol.
    pub fn set_tohost(&mut self, addr: Option<u64>) {
        self.tohost = addr;
    }

    pub fn uart_output(&self) -> &[u8] {
        &self.uart
    }

    pub fn exit_code(&self) -> Option<u64> {
        self.exit_code
    }

    pub fn imem(&self) -> &[u8] {
        &self.imem
    }

    pub fn dmem(&self) -> &[u8] {
        &self.dmem
    }

    fn locate(&self, addr: u64, len: u64) -> Option<Target> {
        let m = &self.map;
        let within = |base: u64, size: u64| addr >= base && addr - base < size && len <= size - (addr - base);
        if within(m.imem_base, m.imem_size) {
            Some(Target::Imem((addr - m.imem_base) as usize))
        } else if within(m.dmem_base, m.dmem_size) {
            Some(Target::Dmem((addr - m.dmem_base) as usize))
        } else if within(m.mmio_base, MMIO_SIZE) {
            Some(Target::Mmio(addr - m.mmio_base))
        } else {
            None
        }
    }

    fn ram(&self, t: Target) -> Option<(&[u8], usize)> {
        match t {
            Target::Imem(o) => Some((&self.imem, o)),
            Target::Dmem(o) => Some((&self.dmem, o)),
            Target::Mmio(_) => None,
        }
    }

    /// Alignment and mapping check without performing the access.
    pub fn check(&self, addr: u64, width: AccessWidth, store: bool) -> Result<(), TrapCause> {
        let (misaligned, fault) = if store {
            (TrapKind::StoreAddressMisaligned, TrapKind::StoreAccessFault)
        } else {
            (TrapKind::LoadAddressMisaligned, TrapKind::LoadAccessFault)
        };
        if !addr.is_multiple_of(width.bytes()) {
            return Err(TrapCause::new(misaligned, addr));
        }
        match self.locate(addr, width.bytes()) {
            Some(_) => Ok(()),
            None => Err(TrapCause::new(fault, addr)),
        }
    }

    /// Little-endian load, sign- or zero-extended to XLEN.
    pub fn load(&self, addr: u64, width: AccessWidth, signed: bool, xlen: Xlen) -> Result<u64, TrapCause> {
        self.check(addr, width, false)?;
        let n = width.bytes() as usize;
        let raw = match self.locate(addr, width.bytes()).unwrap() {
            Target::Mmio(off) => match off & !3 {
                UART_STATUS => 1,
                _ => 0,
            },
            t => {
                let (ram, o) = self.ram(t).unwrap();
                let mut buf = [0u8; 8];
                buf[..n].copy_from_slice(&ram[o..o + n]);
                u64::from_le_bytes(buf)
            }
        };
        let v = if signed && n < 8 {
            let shift = 64 - 8 * n as u32;
            (((raw << shift) as i64) >> shift) as u64
        } else {
            raw
        };
        Ok(xlen.trunc(v))
    }

    pub fn store(&mut self, addr: u64, width: AccessWidth, value: u64) -> Result<StoreEffect, TrapCause> {
        self.check(addr, width, true)?;
        let n = width.bytes() as usize;
        let target = self.locate(addr, width.bytes()).unwrap();
        let effect = match target {
            Target::Mmio(off) => match off & !3 {
                UART_TX if off == UART_TX => {
                    let b = value as u8;
                    self.uart.push(b);
                    if self.echo {
                        let mut out = std::io::stdout().lock();
                        let _ = out.write_all(&[b]);
                        let _ = out.flush();
                    }
                    StoreEffect::Uart(b)
                }
                EXIT if off == EXIT => {
                    let mask = if n == 8 { u64::MAX } else { (1u64 << (8 * n)) - 1 };
                    self.exit_code = Some(value & mask);
                    StoreEffect::Exit(value & mask)
                }
                _ => StoreEffect::None,
            },
            Target::Imem(o) => {
                self.imem[o..o + n].copy_from_slice(&value.to_le_bytes()[..n]);
                StoreEffect::None
            }
            Target::Dmem(o) => {
                self.dmem[o..o + n].copy_from_slice(&value.to_le_bytes()[..n]);
                StoreEffect::None
            }
        };
        if let (Some(th), StoreEffect::None) = (self.tohost, effect) {
            if addr == th && value & 1 == 1 {
                let code = (value & 0xFFFF_FFFF) >> 1;
                self.exit_code = Some(code);
                return Ok(StoreEffect::Exit(code));
            }
        }
        Ok(effect)
    }

    /// Exit code a store would raise, without performing it.
    pub fn exit_effect(&self, addr: u64, width: AccessWidth, value: u64) -> Option<u64> {
        let n = width.bytes() as usize;
        match self.locate(addr, width.bytes())? {
            Target::Mmio(off) if off == EXIT => {
                let mask = if n == 8 { u64::MAX } else { (1u64 << (8 * n)) - 1 };
                return Some(value & mask);
            }
            Target::Mmio(off) if off == UART_TX => return None,
            _ => {}
        }
        match self.tohost {
            Some(th) if addr == th && value & 1 == 1 => Some((value & 0xFFFF_FFFF) >> 1),
            _ => None,
        }
    }

    /// Instruction fetch: aligned words from instruction memory only.
    pub fn fetch(&self, pc: u64) -> Option<u32> {
        if !pc.is_multiple_of(4) {
            return None;
        }
        match self.locate(pc, 4)? {
            Target::Imem(o) => Some(u32::from_le_bytes(self.imem[o..o + 4].try_into().unwrap())),
            _ => None,
        }
    }

    /// Initialise RAM from `(address, bytes)` segments. Each segment must lie
    /// entirely inside one RAM region and segments must not overlap.
    pub fn load_image(&mut self, segments: &[(u64, Vec<u8>)]) -> Result<(), LoadError> {
        let mut spans: Vec<(u64, u64)> = Vec::with_capacity(segments.len());
        for (addr, bytes) in segments {
            if bytes.is_empty() {
                continue;
            }
            let len = bytes.len() as u64;
            match self.locate(*addr, len) {
                Some(Target::Imem(_)) | Some(Target::Dmem(_)) => {}
                _ => return Err(LoadError::OutOfRange { addr: *addr, len: bytes.len() }),
            }
            if let Some(&(a, _)) = spans.iter().find(|&&(a, l)| *addr < a + l && a < addr + len) {
                return Err(LoadError::Overlap { a, b: *addr });
            }
            spans.push((*addr, len));
        }
        for (addr, bytes) in segments {
            if bytes.is_empty() {
                continue;
            }
            let (ram, o) = match self.locate(*addr, bytes.len() as u64).unwrap() {
                Target::Imem(o) => (&mut self.imem, o),
                Target::Dmem(o) => (&mut self.dmem, o),
                Target::Mmio(_) => unreachable!(),
            };
            ram[o..o + bytes.len()].copy_from_slice(bytes);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mem() -> Memory {
        Memory::new(MemoryMap::default())
    }

    const D: u64 = 0x1_0000;

    #[test]
    fn byte_extraction_after_word_store() {
        let mut m = mem();
        m.store(D, AccessWidth::W, 0xDEAD_BEEF).unwrap();
        assert_eq!(m.load(D, AccessWidth::B, true, Xlen::X32).unwrap(), 0xFFFF_FFEF);
        assert_eq!(m.load(D, AccessWidth::B, true, Xlen::X64).unwrap(), 0xFFFF_FFFF_FFFF_FFEF);
        assert_eq!(m.load(D, AccessWidth::B, false, Xlen::X32).unwrap(), 0xEF);
        for (i, b) in [0xEF, 0xBE, 0xAD, 0xDE].into_iter().enumerate() {
            assert_eq!(m.load(D + i as u64, AccessWidth::B, false, Xlen::X32).unwrap(), b);
        }
    }

    #[test]
    fn exit_effect_predicts_store() {
        let mmio = MemoryMap::default().mmio_base;
        let mut m = mem();
        m.set_tohost(Some(D + 0x100));
        let cases = [
            (mmio + EXIT, AccessWidth::W, 5),
            (mmio + EXIT, AccessWidth::B, 0x1ff),
            (mmio + UART_TX, AccessWidth::B, 0x41),
            (D + 0x100, AccessWidth::W, 7),
            (D + 0x100, AccessWidth::W, 6),
            (D, AccessWidth::W, 1),
        ];
        for (addr, w, v) in cases {
            let want = m.exit_effect(addr, w, v);
            let got = match m.clone().store(addr, w, v).unwrap() {
                StoreEffect::Exit(c) => Some(c),
                _ => None,
            };
            assert_eq!(want, got, "{addr:#x}");
        }
    }

    #[test]
    fn lwu_zero_extends() {
        let mut m = mem();
        m.store(D, AccessWidth::W, 0xFFFF_FFFF).unwrap();
        assert_eq!(m.load(D, AccessWidth::W, false, Xlen::X64).unwrap(), 0x0000_0000_FFFF_FFFF);
        assert_eq!(m.load(D, AccessWidth::W, true, Xlen::X64).unwrap(), u64::MAX);
    }

    #[test]
    fn misaligned_and_unmapped() {
        let mut m = mem();
        let e = m.load(D + 4, AccessWidth::D, false, Xlen::X64).unwrap_err();
        assert_eq!(e.kind, TrapKind::LoadAddressMisaligned);
        assert_eq!(e.tval, D + 4);
        let e = m.store(D + 1, AccessWidth::H, 0).unwrap_err();
        assert_eq!(e.kind, TrapKind::StoreAddressMisaligned);
        let e = m.load(0x8000_0000, AccessWidth::W, false, Xlen::X64).unwrap_err();
        assert_eq!(e.kind, TrapKind::LoadAccessFault);
        let e = m.store(0x8000_0000, AccessWidth::W, 0).unwrap_err();
        assert_eq!(e.kind, TrapKind::StoreAccessFault);
    }

    #[test]
    fn byte_round_trip_all_values() {
        let mut m = mem();
        for v in 0..=255u64 {
            m.store(D + v, AccessWidth::B, v).unwrap();
            assert_eq!(m.load(D + v, AccessWidth::B, false, Xlen::X32).unwrap(), v);
        }
    }

    #[test]
    fn uart_and_exit_devices() {
        let mut m = mem();
        let base = m.map().mmio_base;
        assert_eq!(m.store(base + UART_TX, AccessWidth::B, 0x41).unwrap(), StoreEffect::Uart(b'A'));
        assert_eq!(m.uart_output(), b"A");
        assert_eq!(m.load(base + UART_STATUS, AccessWidth::W, false, Xlen::X32).unwrap(), 1);
        assert_eq!(m.store(base + EXIT, AccessWidth::W, 0).unwrap(), StoreEffect::Exit(0));
        assert_eq!(m.exit_code(), Some(0));
    }

    #[test]
    fn tohost_exit() {
        let mut m = mem();
        m.set_tohost(Some(D + 0x100));
        assert_eq!(m.store(D + 0x100, AccessWidth::W, 0).unwrap(), StoreEffect::None);
        assert_eq!(m.store(D + 0x100, AccessWidth::W, (3 << 1) | 1).unwrap(), StoreEffect::Exit(3));
    }

    #[test]
    fn fetch_only_from_imem() {
        let mut m = mem();
        m.load_image(&[(0, vec![0x13, 0, 0, 0]), (D, vec![0x13, 0, 0, 0])]).unwrap();
        assert_eq!(m.fetch(0), Some(0x13));
        assert_eq!(m.fetch(2), None);
        assert_eq!(m.fetch(D), None);
    }

    #[test]
    fn load_image_errors() {
        let mut m = mem();
        assert!(m.load_image(&[]).is_ok());
        assert!(m.imem().iter().all(|&b| b == 0) && m.dmem().iter().all(|&b| b == 0));
        let err = m.load_image(&[(0, vec![1; 8]), (4, vec![2; 8])]).unwrap_err();
        assert!(matches!(err, LoadError::Overlap { .. }));
        let err = m.load_image(&[(0xFFF8, vec![1; 16])]).unwrap_err();
        assert!(matches!(err, LoadError::OutOfRange { .. }));
        let err = m.load_image(&[(0x1000_0000, vec![1])]).unwrap_err();
        assert!(matches!(err, LoadError::OutOfRange { .. }));
    }

    #[test]
    fn map_validation() {
        assert!(MemoryMap::default().validate(Xlen::X32).is_ok());
        let overlap = MemoryMap { dmem_base: 0x8000, ..Default::default() };
        assert!(overlap.validate(Xlen::X32).is_err());
        let npot = MemoryMap { imem_size: 0x3000, ..Default::default() };
        assert!(npot.validate(Xlen::X32).is_err());
        let high = MemoryMap { mmio_base: 0x1_0000_0000, ..Default::default() };
        assert!(high.validate(Xlen::X32).is_err());
        assert!(high.validate(Xlen::X64).is_ok());
    }

    fn width() -> impl Strategy<Value = AccessWidth> {
        prop_oneof![Just(AccessWidth::B), Just(AccessWidth::H), Just(AccessWidth::W), Just(AccessWidth::D)]
    }

    proptest! {
        #[test]
        fn read_after_write(ops in proptest::collection::vec((0u64..0x800, width(), any::<u64>()), 1..64)) {
            let mut m = mem();
            for (off, w, v) in ops {
                let addr = D + (off & !(w.bytes() - 1));
                m.store(addr, w, v).unwrap();
                let bits = 8 * w.bytes() as u32;
                let expect = if bits == 64 { v } else { v & ((1 << bits) - 1) };
                prop_assert_eq!(m.load(addr, w, false, Xlen::X64).unwrap(), expect);
            }
        }

        #[test]
        fn word_store_decomposes_little_endian(v in any::<u32>(), slot in 0u64..0x400) {
            let mut m = mem();
            let addr = D + slot * 4;
            m.store(addr, AccessWidth::W, v as u64).unwrap();
            for (i, b) in v.to_le_bytes().iter().enumerate() {
                prop_assert_eq!(m.load(addr + i as u64, AccessWidth::B, false, Xlen::X32).unwrap(), *b as u64);
            }
        }

        #[test]
        fn mmio_never_aliases_ram(seed in any::<u64>(), off in 0u64..4, v in any::<u64>()) {
            let mut m = mem();
            let img: Vec<u8> = (0..256).map(|i| (seed.wrapping_mul(i + 1) >> 7) as u8).collect();
            m.load_image(&[(0, img.clone()), (D, img.clone())]).unwrap();
            let before = m.clone();
            let base = m.map().mmio_base;
            m.store(base + off * 4, AccessWidth::W, v).unwrap();
            prop_assert_eq!(m.imem(), before.imem());
            prop_assert_eq!(m.dmem(), before.dmem());
        }

        #[test]
        fn image_round_trips(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            let mut m = mem();
            m.load_image(&[(0, bytes.clone())]).unwrap();
            for (i, b) in bytes.iter().enumerate() {
                prop_assert_eq!(m.load(i as u64, AccessWidth::B, false, Xlen::X32).unwrap(), *b as u64);
            }
        }
    }
}
