use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rvpipe_core::harness::{
    bundled_suite_dir, load_bin, load_elf, load_suite, sweep, ReportRow, SettingsFile, SweepOptions, SweepReport,
    Workload, Protocol,
};
use rvpipe_core::reference::{lockstep_with, LockstepOptions};
use rvpipe_core::testgen::random_program;
use rvpipe_core::{
    instruction_roster, CoreConfig, Depth, Isa, MemoryMap, Pipeline, ProgramImage, RunOutcome, RunStats,
    TimingOptions, Xlen,
};

/// Exit status when the cycle budget runs out.
const STATUS_CYCLE_LIMIT: u8 = 124;
/// Exit status for an unmapped fetch or a trap that re-enters itself.
const STATUS_GUEST_FAULT: u8 = 125;
/// Exit status for simulator-level errors (bad arguments, unloadable image).
const STATUS_ERROR: u8 = 2;
/// Exit status from `verify` when the models disagree.
const STATUS_DIVERGED: u8 = 1;

#[derive(Parser)]
#[command(name = "rvpipe", version, about = "Cycle-accurate simulator for in-order RV32/RV64 I/IM pipelines")]
struct Cli {
    /// TOML settings file overriding the memory map and timing knobs.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one program on one core and report its statistics.
    Run(RunArgs),
    /// Run a benchmark suite (or one program) across several variants.
    Sweep(SweepArgs),
    /// Check the pipeline against the reference executor, retirement by retirement.
    Verify(VerifyArgs),
    /// Print supported instructions and counts.
    Roster(RosterArgs),
}

#[derive(Args, Clone)]
struct CoreArgs {
    /// Variant designation such as 54F6SP.
    #[arg(long, conflicts_with_all = ["xlen", "isa", "stages"])]
    variant: Option<String>,
    #[arg(long, value_parser = ["32", "64"])]
    xlen: Option<String>,
    #[arg(long, value_parser = ["i", "im", "I", "IM"])]
    isa: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(5..=8))]
    stages: Option<u8>,
    /// Allow I-only cores deeper than five stages.
    #[arg(long)]
    unofficial: bool,
}

impl CoreArgs {
    fn config(&self) -> Result<CoreConfig> {
        if let Some(v) = &self.variant {
            return Ok(CoreConfig::from_variant(v)?);
        }
        let xlen: Xlen = self.xlen.as_deref().unwrap_or("32").parse()?;
        let isa: Isa = self.isa.as_deref().unwrap_or("im").parse()?;
        let depth = Depth::new(self.stages.unwrap_or(5))?;
        if self.unofficial {
            Ok(CoreConfig::unofficial(xlen, isa, depth))
        } else {
            Ok(CoreConfig::new(xlen, isa, depth)?)
        }
    }
}

#[derive(Args, Clone)]
struct ProgramArgs {
    /// ELF executable.
    #[arg(long, conflicts_with = "bin")]
    elf: Option<PathBuf>,
    /// Flat binary placed at the start of instruction memory.
    #[arg(long, requires = "entry")]
    bin: Option<PathBuf>,
    /// Entry point for --bin.
    #[arg(long, value_parser = parse_u64)]
    entry: Option<u64>,
}

impl ProgramArgs {
    fn is_set(&self) -> bool {
        self.elf.is_some() || self.bin.is_some()
    }

    fn image(&self, xlen: Xlen, map: &MemoryMap) -> Result<ProgramImage> {
        if let Some(p) = &self.elf {
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            return load_elf(&bytes, xlen, map).with_context(|| p.display().to_string());
        }
        if let Some(p) = &self.bin {
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            return Ok(load_bin(&bytes, self.entry.unwrap_or(map.imem_base), map)?);
        }
        bail!("a program is required: pass --elf FILE or --bin FILE --entry ADDR")
    }

    fn workload(&self, map: &MemoryMap, protocol: Protocol) -> Result<Workload> {
        let path = self.elf.as_ref().or(self.bin.as_ref()).context("no program given")?;
        Ok(Workload::from_file(path, self.entry.unwrap_or(map.imem_base), map, protocol)?)
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum StatsFormat {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    core: CoreArgs,
    #[command(flatten)]
    program: ProgramArgs,
    #[arg(long, default_value_t = 100_000_000)]
    max_cycles: u64,
    /// Statistics format, written to standard error (or --stats-out).
    #[arg(long, value_enum, default_value = "table")]
    stats: StatsFormat,
    #[arg(long)]
    stats_out: Option<PathBuf>,
    /// Print the per-cycle stage occupancy before the statistics.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// `all`, or a comma-separated list of designations.
    #[arg(long, default_value = "all")]
    variants: String,
    /// Directory of `<name>-<target>.elf` binaries; defaults to the bundled suite.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[command(flatten)]
    program: ProgramArgs,
    /// Output file; format follows the extension (.csv, .json, else table).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000_000)]
    max_cycles: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    core: CoreArgs,
    #[command(flatten)]
    program: ProgramArgs,
    /// Depths to compare; defaults to 5,6,7,8.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(5..=8))]
    depths: Vec<u8>,
    /// Instead of a program, check this many generated random programs.
    #[arg(long, conflicts_with_all = ["elf", "bin"])]
    random: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instructions per generated program.
    #[arg(long, default_value_t = 500)]
    length: usize,
    #[arg(long, default_value_t = 10_000_000)]
    max_cycles: u64,
}

#[derive(Args)]
struct RosterArgs {
    #[arg(long)]
    variant: Option<String>,
    /// Only print counts.
    #[arg(long)]
    counts: bool,
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let s = s.replace('_', "");
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    }
    .map_err(|e| e.to_string())
}

struct Settings {
    map: MemoryMap,
    timing: TimingOptions,
}

fn settings(path: Option<&Path>) -> Result<Settings> {
    let mut s = Settings { map: MemoryMap::default(), timing: TimingOptions::default() };
    if let Some(p) = path {
        SettingsFile::read(p)?.apply(&mut s.map, &mut s.timing)?;
    }
    Ok(s)
}

/// Write to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("rvpipe: {e:#}");
            ExitCode::from(STATUS_ERROR)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    let s = settings(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Run(a) => run(a, s),
        Cmd::Sweep(a) => run_sweep(a, s),
        Cmd::Verify(a) => verify(a, s),
        Cmd::Roster(a) => roster(a),
    }
}

#[derive(Serialize)]
struct RunSummary<'a> {
    schema_version: u32,
    variant: String,
    outcome: RunOutcome,
    stats: &'a RunStats,
}

fn exit_status(outcome: RunOutcome) -> u8 {
    match outcome {
        RunOutcome::Exited { code } => code as u8,
        RunOutcome::CycleLimit { .. } => STATUS_CYCLE_LIMIT,
        RunOutcome::UnmappedFetch { .. } | RunOutcome::TrapLoop { .. } => STATUS_GUEST_FAULT,
    }
}

fn run(a: RunArgs, s: Settings) -> Result<u8> {
    let config = a.core.config()?;
    let image = a.program.image(config.xlen, &s.map)?;
    let mut p = Pipeline::new(config, s.timing, s.map, &image)?;
    p.state.memory.set_echo(true);
    if a.trace {
        p.enable_trace();
    }
    let outcome = p.run(a.max_cycles);
    std::io::stdout().flush()?;
    let stats = p.stats();

    let mut out = String::new();
    if a.trace {
        let names = p.plan().stage_names.iter().map(|n| format!("{:<10}", n.to_string())).collect::<String>();
        out.push_str(&format!("{:>8}  {}\n", "cycle", names.trim_end()));
        for row in p.take_trace() {
            let cells = row.stages.iter().map(|c| format!("{c:<10}")).collect::<String>();
            out.push_str(&format!("{:>8}  {}\n", row.cycle, cells.trim_end()));
        }
    }
    let name = a.program.elf.as_ref().or(a.program.bin.as_ref()).and_then(|p| p.file_stem());
    let row = ReportRow::new(&name.map(|n| n.to_string_lossy()).unwrap_or_default(), config, outcome, &stats);
    match a.stats {
        StatsFormat::Json => {
            let summary = RunSummary { schema_version: 1, variant: config.variant_name(), outcome, stats: &stats };
            out.push_str(&serde_json::to_string_pretty(&summary)?);
            out.push('\n');
        }
        StatsFormat::Csv => out.push_str(&SweepReport::new(vec![row]).to_csv()),
        StatsFormat::Table => {
            out.push_str(&format!("outcome: {outcome:?}\n"));
            out.push_str(&SweepReport::new(vec![row]).to_table());
        }
    }
    match &a.stats_out {
        Some(path) => std::fs::write(path, out).with_context(|| path.display().to_string())?,
        None => eprint!("{out}"),
    }
    Ok(exit_status(outcome))
}

fn parse_variants(list: &str) -> Result<Vec<CoreConfig>> {
    if list.eq_ignore_ascii_case("all") {
        return Ok(CoreConfig::all());
    }
    list.split(',').filter(|v| !v.trim().is_empty()).map(|v| Ok(CoreConfig::from_variant(v)?)).collect()
}

fn run_sweep(a: SweepArgs, s: Settings) -> Result<u8> {
    let variants = parse_variants(&a.variants)?;
    let workloads = if a.program.is_set() {
        vec![a.program.workload(&s.map, Protocol::None)?]
    } else {
        load_suite(&a.suite.unwrap_or_else(bundled_suite_dir), &s.map)?
    };
    let opts = SweepOptions { timing: s.timing, map: s.map, max_cycles: a.max_cycles };
    let report = sweep(&workloads, &variants, &opts)?;
    match a.out {
        Some(path) => {
            let text = match path.extension().and_then(|e| e.to_str()) {
                Some("csv") => report.to_csv(),
                Some("json") => report.to_json(),
                _ => report.to_table(),
            };
            std::fs::write(&path, text).with_context(|| path.display().to_string())?;
        }
        None => emit(&report.to_table())?,
    }
    Ok(0)
}

fn verify(a: VerifyArgs, s: Settings) -> Result<u8> {
    let mut config = a.core.config()?;
    if a.core.variant.is_none() && a.core.stages.is_none() {
        config = CoreConfig::unofficial(config.xlen, config.isa, Depth::new(5)?);
    }
    let depths = if a.depths.is_empty() {
        Depth::ALL.to_vec()
    } else {
        a.depths.iter().map(|&d| Depth::new(d)).collect::<Result<_, _>>()?
    };
    let opts = LockstepOptions { map: s.map.clone(), timing: s.timing, max_cycles: a.max_cycles, ..Default::default() };
    let images: Vec<(String, ProgramImage)> = match a.random {
        Some(n) => (a.seed..a.seed + n)
            .map(|seed| (format!("random seed {seed}"), random_program(seed, config.xlen, config.isa, a.length)))
            .collect(),
        None => vec![("program".to_string(), a.program.image(config.xlen, &s.map)?)],
    };
    let mut runs = Vec::new();
    for (label, image) in &images {
        match lockstep_with(image, config, &depths, &opts) {
            Ok(report) => runs.extend(report.runs),
            Err(e) => match e.divergence() {
                Some(d) => {
                    eprintln!("{label}: {d}");
                    emit(&format!("{}\n", serde_json::to_string_pretty(d)?))?;
                    return Ok(STATUS_DIVERGED);
                }
                None => return Err(e).context(label.clone()),
            },
        }
    }
    if a.random.is_some() {
        emit(&format!("{}\n", serde_json::json!({ "programs": images.len(), "runs": runs.len(), "divergences": 0 })))?;
    } else {
        emit(&format!("{}\n", serde_json::to_string_pretty(&runs)?))?;
    }
    Ok(0)
}

fn roster(a: RosterArgs) -> Result<u8> {
    let configs = match &a.variant {
        Some(v) => vec![CoreConfig::from_variant(v)?],
        None => CoreConfig::all().into_iter().filter(|c| c.depth.stages() == 5).collect(),
    };
    let mut text = String::new();
    for c in configs {
        let list = instruction_roster(&c);
        let isa = c.isa.to_string().to_lowercase();
        text.push_str(&format!("RV{}{isa} ({}): {} instructions\n", c.xlen, c.variant_name(), list.len()));
        if !a.counts {
            let names: Vec<String> = list.iter().map(|m| m.to_string()).collect();
            for chunk in names.chunks(12) {
                text.push_str(&format!("  {}\n", chunk.join(" ")));
            }
        }
    }
    emit(&text)?;
    Ok(0)
}
