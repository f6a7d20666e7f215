//! Running workloads across many variants.

use rayon::prelude::*;

use crate::config::{CoreConfig, Isa, TimingOptions};
use crate::error::BenchError;
use crate::harness::bench::run_benchmark;
use crate::harness::report::{ReportRow, SweepReport};
use crate::harness::suite::Workload;
use crate::memory::MemoryMap;

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub timing: TimingOptions,
    pub map: MemoryMap,
    pub max_cycles: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { timing: TimingOptions::default(), map: MemoryMap::default(), max_cycles: 100_000_000 }
    }
}

/// Run every workload on every variant. Rows come out workload-major in the
/// order given, regardless of which runs finish first.
pub fn sweep(workloads: &[Workload], variants: &[CoreConfig], opts: &SweepOptions) -> Result<SweepReport, BenchError> {
    let jobs: Vec<(&Workload, CoreConfig)> =
        workloads.iter().flat_map(|w| variants.iter().map(move |&v| (w, v))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(w, config)| {
            let image = w
                .image_for(config)
                .ok_or_else(|| BenchError::Suite(format!("{} has no build for {config}", w.name)))?;
            let r = run_benchmark(image, config, &opts.timing, &opts.map, w.protocol, opts.max_cycles)?;
            let mut row = ReportRow::new(&w.name, config, r.outcome, &r.stats);
            row.iterations = r.iterations;
            row.timed_cycles = r.timed_cycles;
            row.score_per_mcycle = r.score_per_mcycle;
            Ok(row)
        })
        .collect::<Result<Vec<_>, BenchError>>()?;
    Ok(SweepReport::new(add_comparisons(rows)))
}

/// Fill the columns that compare rows against each other: IPC change versus
/// the depth-5 core with the same width and ISA, and the I/IM cycle ratio,
/// which only exists at depth 5.
pub fn add_comparisons(mut rows: Vec<ReportRow>) -> Vec<ReportRow> {
    let find = |rows: &[ReportRow], w: &str, xlen: u32, isa: &str, depth: u8| {
        rows.iter().find(|r| r.workload == w && r.xlen == xlen && r.isa == isa && r.depth == depth).cloned()
    };
    let snapshot = rows.clone();
    for row in &mut rows {
        row.ipc_delta_vs_depth5_pct = find(&snapshot, &row.workload, row.xlen, &row.isa, 5)
            .filter(|b| b.ipc > 0.0)
            .map(|b| (row.ipc / b.ipc - 1.0) * 100.0);
        row.i_over_im_cycles = if row.depth == 5 && row.isa == Isa::IM.to_string() {
            find(&snapshot, &row.workload, row.xlen, &Isa::I.to_string(), 5)
                .filter(|_| row.cycles > 0)
                .map(|i| i.cycles as f64 / row.cycles as f64)
        } else {
            None
        };
    }
    rows
}
