//! Benchmark workloads: the bundled suite (one prebuilt ELF per target) or a
//! single user-supplied program.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::config::{CoreConfig, Isa, Xlen};
use crate::error::{BenchError, ImageError};
use crate::harness::bench::Protocol;
use crate::harness::elf::{is_elf, load_bin, load_elf};
use crate::image::ProgramImage;
use crate::memory::MemoryMap;

/// Names of the bundled microbenchmarks, in report order.
pub const BUNDLED: [&str; 7] =
    ["nop-sled", "alu-chain", "load-use-chain", "branch-loop", "mul-kernel", "div-kernel", "mini-dhry"];

const TARGETS: [(&str, Xlen, Isa); 4] =
    [("rv32i", Xlen::X32, Isa::I), ("rv32im", Xlen::X32, Isa::IM), ("rv64i", Xlen::X64, Isa::I), ("rv64im", Xlen::X64, Isa::IM)];

/// Directory holding the bundled suite sources and prebuilt binaries.
pub fn bundled_suite_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../suite")
}

#[derive(Clone, Debug)]
pub struct Workload {
    pub name: String,
    pub protocol: Protocol,
    builds: Vec<(Xlen, Isa, ProgramImage)>,
}

impl Workload {
    pub fn new(name: impl Into<String>, protocol: Protocol) -> Self {
        Workload { name: name.into(), protocol, builds: Vec::new() }
    }

    /// Register the build used for cores of width `xlen` and profile `isa`.
    /// An I build also serves IM cores unless an IM build is added.
    pub fn with_build(mut self, xlen: Xlen, isa: Isa, image: ProgramImage) -> Self {
        self.builds.push((xlen, isa, image));
        self
    }

    pub fn image_for(&self, config: CoreConfig) -> Option<&ProgramImage> {
        let find = |isa| self.builds.iter().find(|(x, i, _)| *x == config.xlen && *i == isa).map(|b| &b.2);
        find(config.isa).or_else(|| if config.isa == Isa::IM { find(Isa::I) } else { None })
    }

    /// A single program file. ELF images serve the width of their class;
    /// flat binaries (loaded at `entry`) serve both widths.
    pub fn from_file(path: &Path, entry: u64, map: &MemoryMap, protocol: Protocol) -> Result<Self, BenchError> {
        let bytes = std::fs::read(path).map_err(ImageError::from)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut w = Workload::new(name, protocol);
        if is_elf(&bytes) {
            let xlen = if bytes.get(4) == Some(&2) { Xlen::X64 } else { Xlen::X32 };
            w = w.with_build(xlen, Isa::I, load_elf(&bytes, xlen, map)?);
        } else {
            let image = load_bin(&bytes, entry, map)?;
            w = w.with_build(Xlen::X32, Isa::I, image.clone()).with_build(Xlen::X64, Isa::I, image);
        }
        Ok(w)
    }
}

/// Load every `<name>-<target>.elf` found in `dir` or `dir/elf`, grouped by
/// name. Bundled benchmarks come first in their usual order, then any
/// others alphabetically.
pub fn load_suite(dir: &Path, map: &MemoryMap) -> Result<Vec<Workload>, BenchError> {
    let elf_dir = if dir.join("elf").is_dir() { dir.join("elf") } else { dir.to_path_buf() };
    let entries = std::fs::read_dir(&elf_dir)
        .map_err(|e| BenchError::Suite(format!("{}: {e}", elf_dir.display())))?;
    let mut found: BTreeMap<String, Workload> = BTreeMap::new();
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for path in paths {
        let Some(stem) = path.file_name().and_then(|n| n.to_str()).and_then(|n| n.strip_suffix(".elf")) else {
            continue;
        };
        let Some((name, xlen, isa)) =
            TARGETS.iter().find_map(|&(t, x, i)| stem.strip_suffix(t)?.strip_suffix('-').map(|n| (n, x, i)))
        else {
            continue;
        };
        let bytes = std::fs::read(&path).map_err(ImageError::from)?;
        let image = load_elf(&bytes, xlen, map)?;
        let w = found.remove(name).unwrap_or_else(|| Workload::new(name, Protocol::Iterations));
        found.insert(name.to_string(), w.with_build(xlen, isa, image));
    }
    if found.is_empty() {
        return Err(BenchError::Suite(format!("no benchmark binaries in {}", elf_dir.display())));
    }
    let mut out: Vec<Workload> = BUNDLED.iter().filter_map(|n| found.remove(*n)).collect();
    out.extend(found.into_values());
    Ok(out)
}
