//! Program loading from ELF executables and flat binaries.

use goblin::elf::{header, program_header::PT_LOAD, Elf};

use crate::config::Xlen;
use crate::error::ImageError;
use crate::image::ProgramImage;
use crate::memory::{Memory, MemoryMap};

const ELF_MAGIC: &[u8; 4] = b"\x7fELF";

pub fn is_elf(bytes: &[u8]) -> bool {
    bytes.starts_with(ELF_MAGIC)
}

/// Parse a little-endian RISC-V executable whose class matches `xlen`.
///
/// Every `PT_LOAD` segment becomes one image segment (file bytes padded with
/// zeros up to the memory size). A `tohost` symbol, if present, is recorded.
pub fn load_elf(bytes: &[u8], xlen: Xlen, map: &MemoryMap) -> Result<ProgramImage, ImageError> {
    let elf = Elf::parse(bytes).map_err(|e| ImageError::Malformed(e.to_string()))?;
    let class = if elf.is_64 { 64 } else { 32 };
    if class != xlen.bits() {
        return Err(ImageError::ClassMismatch { image: class, core: xlen.bits() });
    }
    if !elf.little_endian {
        return Err(ImageError::BigEndian);
    }
    if elf.header.e_machine != header::EM_RISCV {
        return Err(ImageError::NotRiscv(elf.header.e_machine));
    }
    let mut segments = Vec::new();
    for ph in elf.program_headers.iter().filter(|p| p.p_type == PT_LOAD && p.p_memsz > 0) {
        let start = ph.p_offset as usize;
        let file = start
            .checked_add(ph.p_filesz as usize)
            .and_then(|end| bytes.get(start..end))
            .ok_or_else(|| ImageError::Malformed(format!("segment at {:#x} runs past end of file", ph.p_vaddr)))?;
        if ph.p_filesz > ph.p_memsz {
            return Err(ImageError::Malformed(format!("segment at {:#x} has filesz > memsz", ph.p_vaddr)));
        }
        let mut data = file.to_vec();
        data.resize(ph.p_memsz as usize, 0);
        segments.push((ph.p_vaddr, data));
    }
    let tohost = elf
        .syms
        .iter()
        .find(|s| elf.strtab.get_at(s.st_name) == Some("tohost"))
        .map(|s| s.st_value);
    let image = ProgramImage { entry: elf.entry, segments, tohost };
    check_fits(&image, map)?;
    Ok(image)
}

/// A raw binary placed at the start of instruction memory.
pub fn load_bin(bytes: &[u8], entry: u64, map: &MemoryMap) -> Result<ProgramImage, ImageError> {
    let image = ProgramImage::flat(map.imem_base, bytes.to_vec(), entry);
    check_fits(&image, map)?;
    Ok(image)
}

fn check_fits(image: &ProgramImage, map: &MemoryMap) -> Result<(), ImageError> {
    Memory::new(map.clone()).load_image(&image.segments)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_garbage() {
        assert!(matches!(
            load_elf(b"\x7fELFnonsense", Xlen::X32, &MemoryMap::default()),
            Err(ImageError::Malformed(_))
        ));
        assert!(!is_elf(b"\x13\0\0\0"));
    }

    #[test]
    fn flat_binary_lands_at_imem_base() {
        let img = load_bin(&[0x13, 0, 0, 0], 0, &MemoryMap::default()).unwrap();
        assert_eq!(img.segments, vec![(0, vec![0x13, 0, 0, 0])]);
        assert!(load_bin(&vec![0; 0x2_0000], 0, &MemoryMap::default()).is_err());
    }
}
