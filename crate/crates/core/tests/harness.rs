use std::path::{Path, PathBuf};

use rvpipe_core::harness::{
    bundled_suite_dir, load_bin, load_elf, load_suite, parse_report, run_benchmark, sweep, Protocol, SettingsFile,
    SweepOptions, SweepReport, Workload,
};
use rvpipe_core::{asm, BenchError, CoreConfig, ImageError, MemoryMap, ProgramImage, RunOutcome, TimingOptions, Xlen};

fn suite_elf(name: &str, target: &str) -> Vec<u8> {
    std::fs::read(bundled_suite_dir().join("elf").join(format!("{name}-{target}.elf"))).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

fn v(name: &str) -> CoreConfig {
    CoreConfig::from_variant(name).unwrap()
}

/// Program headers read with plain byte arithmetic: (vaddr, file bytes, memsz)
/// for each PT_LOAD entry.
fn raw_load_segments(b: &[u8]) -> Vec<(u64, Vec<u8>, u64)> {
    let u16_at = |o: usize| u16::from_le_bytes(b[o..o + 2].try_into().unwrap()) as u64;
    let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().unwrap()) as u64;
    let u64_at = |o: usize| u64::from_le_bytes(b[o..o + 8].try_into().unwrap());
    let is64 = b[4] == 2;
    let (phoff, phentsize, phnum) =
        if is64 { (u64_at(0x20), u16_at(0x36), u16_at(0x38)) } else { (u32_at(0x1C), u16_at(0x2A), u16_at(0x2C)) };
    let mut out = Vec::new();
    for i in 0..phnum {
        let p = (phoff + i * phentsize) as usize;
        if u32_at(p) != 1 {
            continue;
        }
        let (off, vaddr, filesz, memsz) = if is64 {
            (u64_at(p + 8), u64_at(p + 16), u64_at(p + 32), u64_at(p + 40))
        } else {
            (u32_at(p + 4), u32_at(p + 8), u32_at(p + 16), u32_at(p + 20))
        };
        out.push((vaddr, b[off as usize..(off + filesz) as usize].to_vec(), memsz));
    }
    out
}

#[test]
fn suite_elfs_load_byte_exact() {
    let map = MemoryMap::default();
    for name in ["mini-dhry", "load-use-chain"] {
        for (target, xlen) in [("rv32im", Xlen::X32), ("rv64i", Xlen::X64)] {
            let bytes = suite_elf(name, target);
            let img = load_elf(&bytes, xlen, &map).unwrap();
            let raw = raw_load_segments(&bytes);
            assert_eq!(img.segments.len(), raw.len());
            for ((addr, data), (vaddr, file, memsz)) in img.segments.iter().zip(&raw) {
                assert_eq!(addr, vaddr);
                assert_eq!(data.len() as u64, *memsz);
                assert_eq!(&data[..file.len()], &file[..]);
                assert!(data[file.len()..].iter().all(|&b| b == 0));
            }
            assert_eq!(img.entry, 0);
        }
    }
}

/// ELF32 header, one program header and eight bytes of code, laid out by hand.
fn hand_linked_elf(code: &[u8], vaddr: u32, machine: u16) -> Vec<u8> {
    let mut b = vec![0u8; 0x54];
    b[..4].copy_from_slice(b"\x7fELF");
    b[4] = 1; // 32-bit
    b[5] = 1; // little-endian
    b[6] = 1;
    b[0x10..0x12].copy_from_slice(&2u16.to_le_bytes()); // ET_EXEC
    b[0x12..0x14].copy_from_slice(&machine.to_le_bytes());
    b[0x14..0x18].copy_from_slice(&1u32.to_le_bytes());
    b[0x18..0x1C].copy_from_slice(&vaddr.to_le_bytes()); // entry
    b[0x1C..0x20].copy_from_slice(&0x34u32.to_le_bytes()); // phoff
    b[0x28..0x2A].copy_from_slice(&0x34u16.to_le_bytes()); // ehsize
    b[0x2A..0x2C].copy_from_slice(&0x20u16.to_le_bytes()); // phentsize
    b[0x2C..0x2E].copy_from_slice(&1u16.to_le_bytes()); // phnum
    b[0x2E..0x30].copy_from_slice(&0x28u16.to_le_bytes()); // shentsize
    let ph = 0x34;
    b[ph..ph + 4].copy_from_slice(&1u32.to_le_bytes()); // PT_LOAD
    b[ph + 4..ph + 8].copy_from_slice(&0x54u32.to_le_bytes()); // offset
    b[ph + 8..ph + 12].copy_from_slice(&vaddr.to_le_bytes());
    b[ph + 12..ph + 16].copy_from_slice(&vaddr.to_le_bytes());
    b[ph + 16..ph + 20].copy_from_slice(&(code.len() as u32).to_le_bytes());
    b[ph + 20..ph + 24].copy_from_slice(&(code.len() as u32).to_le_bytes());
    b[ph + 24..ph + 28].copy_from_slice(&5u32.to_le_bytes());
    b.extend_from_slice(code);
    b
}

#[test]
fn minimal_hand_linked_elf() {
    let code: Vec<u8> =
        [asm::addi(asm::Reg::A0, asm::Reg::ZERO, 9)].into_iter().chain(asm::exit_reg(asm::Reg::A0)).flat_map(u32::to_le_bytes).collect();
    let elf = hand_linked_elf(&code, 0x40, 243);
    let img = load_elf(&elf, Xlen::X32, &MemoryMap::default()).unwrap();
    assert_eq!(img.segments, vec![(0x40, code.clone())]);
    assert_eq!(img.entry, 0x40);
    let r = rvpipe_core::simulate(v("46F5SP"), TimingOptions::default(), MemoryMap::default(), &img, 1000).unwrap();
    assert_eq!(r.outcome, RunOutcome::Exited { code: 9 });

    assert!(matches!(
        load_elf(&hand_linked_elf(&code, 0x40, 62), Xlen::X32, &MemoryMap::default()),
        Err(ImageError::NotRiscv(62))
    ));
    assert!(matches!(
        load_elf(&hand_linked_elf(&code, 0x2_0000, 243), Xlen::X32, &MemoryMap::default()),
        Err(ImageError::Load(_))
    ));
}

#[test]
fn class_mismatch_is_rejected() {
    let map = MemoryMap::default();
    assert!(matches!(
        load_elf(&suite_elf("nop-sled", "rv64im"), Xlen::X32, &map),
        Err(ImageError::ClassMismatch { image: 64, core: 32 })
    ));
    assert!(matches!(
        load_elf(&suite_elf("nop-sled", "rv32i"), Xlen::X64, &map),
        Err(ImageError::ClassMismatch { image: 32, core: 64 })
    ));
}

#[test]
fn tohost_symbol_ends_the_run() {
    for (file, xlen, variant) in [("tohost-rv32.elf", Xlen::X32, "46F5SP"), ("tohost-rv64.elf", Xlen::X64, "72F7SP")] {
        let bytes = std::fs::read(fixture("fixtures").join(file)).unwrap();
        let img = load_elf(&bytes, xlen, &MemoryMap::default()).unwrap();
        assert_eq!(img.tohost, Some(0x10000));
        let r = rvpipe_core::simulate(v(variant), TimingOptions::default(), MemoryMap::default(), &img, 10_000).unwrap();
        assert_eq!(r.outcome, RunOutcome::Exited { code: 3 });
    }
}

#[test]
fn flat_binary_fallback() {
    let words = [asm::nop(), asm::addi(asm::Reg::A0, asm::Reg::ZERO, 4)];
    let mut bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
    bytes.extend(asm::exit_reg(asm::Reg::A0).into_iter().flat_map(u32::to_le_bytes));
    let img = load_bin(&bytes, 4, &MemoryMap::default()).unwrap();
    assert_eq!(img.segments, vec![(0, bytes.clone())]);
    let r = rvpipe_core::simulate(v("54F6SP"), TimingOptions::default(), MemoryMap::default(), &img, 1000).unwrap();
    assert_eq!(r.outcome, RunOutcome::Exited { code: 4 });
    assert_eq!(r.stats.instructions_retired, 1 + asm::exit_reg(asm::Reg::A0).len() as u64);
}

#[test]
fn mini_dhry_scores_and_is_deterministic() {
    let img = load_elf(&suite_elf("mini-dhry", "rv32im"), Xlen::X32, &MemoryMap::default()).unwrap();
    let run = |max| {
        run_benchmark(&img, v("54F5SP"), &TimingOptions::default(), &MemoryMap::default(), Protocol::Iterations, max)
            .unwrap()
    };
    let a = run(10_000_000);
    assert_eq!(a.iterations, Some(1000));
    let timed = a.timed_cycles.unwrap();
    assert!(timed < a.stats.cycles && timed > a.stats.cycles * 9 / 10);
    assert_eq!(a.score_per_mcycle, Some(1000.0 * 1e6 / timed as f64));
    assert_eq!(a, run(10_000_000));
    let b = run(a.stats.cycles);
    assert_eq!(b.score_per_mcycle, a.score_per_mcycle);

    // checksum agrees between the reference executor and every core
    let check = a.checksum.unwrap();
    for name in ["46F5SP", "54F8SP"] {
        let r = run_benchmark(&img, v(name), &TimingOptions::default(), &MemoryMap::default(), Protocol::Iterations, 10_000_000)
            .unwrap();
        assert_eq!(r.checksum, Some(check));
    }
    let mut reference = rvpipe_core::RefExecutor::new(v("54F5SP"), MemoryMap::default(), &img).unwrap();
    reference.run(10_000_000);
    let uart = String::from_utf8_lossy(reference.state.memory.uart_output()).into_owned();
    assert_eq!(parse_report(&uart).unwrap().checksum, Some(check));
}

#[test]
fn silent_program_has_no_score() {
    let img = ProgramImage::from_words(0, &asm::exit_reg(asm::Reg::ZERO));
    let r = run_benchmark(&img, v("54F5SP"), &TimingOptions::default(), &MemoryMap::default(), Protocol::Iterations, 100);
    assert!(matches!(r, Err(BenchError::NoScore)));
    let r = run_benchmark(&img, v("54F5SP"), &TimingOptions::default(), &MemoryMap::default(), Protocol::None, 100);
    assert!(r.unwrap().score_per_mcycle.is_none());
    let spin = ProgramImage::from_words(0, &[asm::jal(asm::Reg::ZERO, 0)]);
    let r = run_benchmark(&spin, v("54F5SP"), &TimingOptions::default(), &MemoryMap::default(), Protocol::None, 100);
    assert!(matches!(r, Err(BenchError::DidNotFinish(_))));
}

fn suite() -> Vec<Workload> {
    load_suite(&bundled_suite_dir(), &MemoryMap::default()).unwrap()
}

fn pick(names: &[&str]) -> Vec<Workload> {
    suite().into_iter().filter(|w| names.contains(&w.name.as_str())).collect()
}

#[test]
fn suite_has_every_bundled_benchmark_for_every_target() {
    let s = suite();
    let names: Vec<_> = s.iter().map(|w| w.name.as_str()).collect();
    assert_eq!(names, rvpipe_core::harness::BUNDLED);
    for w in &s {
        for c in CoreConfig::all() {
            assert!(w.image_for(c).is_some(), "{} {c}", w.name);
        }
    }
}

#[test]
fn hardware_multiply_beats_software_loop() {
    let r = sweep(&pick(&["mul-kernel"]), &[v("46F5SP"), v("54F5SP")], &SweepOptions::default()).unwrap();
    let (i, im) = (&r.rows[0], &r.rows[1]);
    assert!(im.cycles < i.cycles);
    assert_eq!(im.i_over_im_cycles, Some(i.cycles as f64 / im.cycles as f64));
    assert_eq!(i.i_over_im_cycles, None);
}

#[test]
fn branch_heavy_ipc_falls_with_depth() {
    let variants: Vec<_> = ["54F5SP", "54F6SP", "54F7SP", "54F8SP"].iter().map(|n| v(n)).collect();
    let r = sweep(&pick(&["branch-loop"]), &variants, &SweepOptions::default()).unwrap();
    let ipc: Vec<f64> = r.rows.iter().map(|r| r.ipc).collect();
    assert!(ipc.windows(2).all(|w| w[0] >= w[1]), "{ipc:?}");
    assert_eq!(r.rows[0].ipc_delta_vs_depth5_pct, Some(0.0));
    assert!(r.rows[1..].iter().all(|r| r.i_over_im_cycles.is_none()));
}

fn golden_sweep() -> SweepReport {
    sweep(&pick(&["alu-chain", "branch-loop", "mini-dhry"]), &CoreConfig::all(), &SweepOptions::default()).unwrap()
}

#[test]
fn report_formats_round_trip() {
    let r = golden_sweep();
    assert_eq!(r.rows.len(), 30);
    assert_eq!(SweepReport::from_csv(&r.to_csv()).unwrap(), r);
    assert_eq!(SweepReport::from_json(&r.to_json()).unwrap(), r);
    let table = r.to_table();
    assert_eq!(table.lines().count(), 32);
    let widths: Vec<usize> = table.lines().map(|l| l.len()).collect();
    assert!(widths.iter().all(|&w| w == widths[0]), "{widths:?}");
    assert!(table.contains("72F8SP"));
}

#[test]
fn report_matches_golden_file() {
    let path = fixture("golden").join("sweep.csv");
    let csv = golden_sweep().to_csv();
    if std::env::var_os("RVPIPE_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &csv).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file present");
    assert_eq!(csv, golden);
    assert_eq!(golden_sweep().to_csv(), csv);
}

#[test]
fn settings_file_changes_timing() {
    let f = SettingsFile::parse("div_overhead = 10\npredictor_entries = 1\n").unwrap();
    let mut opts = SweepOptions::default();
    f.apply(&mut opts.map, &mut opts.timing).unwrap();
    let base = sweep(&pick(&["div-kernel"]), &[v("54F5SP")], &SweepOptions::default()).unwrap();
    let slow = sweep(&pick(&["div-kernel"]), &[v("54F5SP")], &opts).unwrap();
    // two divider operations (quotient and remainder) per element
    assert_eq!(slow.rows[0].div_busy - base.rows[0].div_busy, 8 * 2 * 16 * 50);
}
