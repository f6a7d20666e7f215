//! Running a benchmark image and scoring it from its own UART report.

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::config::{CoreConfig, TimingOptions};
use crate::error::{BenchError, ImageError};
use crate::image::{ProgramImage, RunOutcome};
use crate::memory::MemoryMap;
use crate::pipeline::{simulate, RunStats};

/// How a benchmark reports its result on the UART.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Lines `ITERS <n>`, `CYCLES <n>` and optionally `CHECK <n>`, numbers
    /// in decimal or `0x` hex. CYCLES is the benchmark's own cycle-CSR
    /// measurement of the timed region.
    Iterations,
    /// No score; only the simulator's counters are reported.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub variant: String,
    pub outcome: RunOutcome,
    pub stats: RunStats,
    pub iterations: Option<u64>,
    pub timed_cycles: Option<u64>,
    pub checksum: Option<u64>,
    /// Iterations per million timed cycles.
    pub score_per_mcycle: Option<f64>,
    pub uart: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelfReport {
    pub iterations: u64,
    pub cycles: u64,
    pub checksum: Option<u64>,
}

impl SelfReport {
    pub fn score_per_mcycle(&self) -> f64 {
        self.iterations as f64 * 1e6 / self.cycles as f64
    }
}

fn parse_num(s: &str) -> Option<u64> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

/// Extract the `ITERS`/`CYCLES`/`CHECK` lines from UART output. The last
/// occurrence of each key wins.
pub fn parse_report(uart: &str) -> Result<SelfReport, BenchError> {
    let re = Regex::new(r"(?m)^\s*(ITERS|CYCLES|CHECK)\s+(0[xX][0-9a-fA-F]+|\d+)\s*$").unwrap();
    let (mut iters, mut cycles, mut check) = (None, None, None);
    for cap in re.captures_iter(uart) {
        let v = parse_num(&cap[2]);
        match &cap[1] {
            "ITERS" => iters = v,
            "CYCLES" => cycles = v,
            _ => check = v,
        }
    }
    match (iters, cycles) {
        (Some(iterations), Some(cycles)) if cycles > 0 => Ok(SelfReport { iterations, cycles, checksum: check }),
        _ => Err(BenchError::NoScore),
    }
}

/// Run `image` to completion on `config` and score it per `protocol`.
pub fn run_benchmark(
    image: &ProgramImage,
    config: CoreConfig,
    timing: &TimingOptions,
    map: &MemoryMap,
    protocol: Protocol,
    max_cycles: u64,
) -> Result<BenchResult, BenchError> {
    let sim = simulate(config, timing.clone(), map.clone(), image, max_cycles).map_err(ImageError::from)?;
    let uart = String::from_utf8_lossy(sim.state.memory.uart_output()).into_owned();
    if !matches!(sim.outcome, RunOutcome::Exited { .. }) {
        return Err(BenchError::DidNotFinish(format!("{:?}", sim.outcome)));
    }
    let report = match protocol {
        Protocol::Iterations => Some(parse_report(&uart)?),
        Protocol::None => None,
    };
    Ok(BenchResult {
        variant: config.variant_name(),
        outcome: sim.outcome,
        stats: sim.stats,
        iterations: report.map(|r| r.iterations),
        timed_cycles: report.map(|r| r.cycles),
        checksum: report.and_then(|r| r.checksum),
        score_per_mcycle: report.map(|r| r.score_per_mcycle()),
        uart,
    })
}
