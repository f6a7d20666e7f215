//! Sweep reports: one flat row per (workload, variant), emitted as CSV,
//! versioned JSON, or an aligned text table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::CoreConfig;
use crate::image::RunOutcome;
use crate::pipeline::RunStats;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub workload: String,
    pub variant: String,
    pub xlen: u32,
    pub isa: String,
    pub depth: u8,
    pub outcome: String,
    pub exit_code: Option<u64>,
    pub cycles: u64,
    pub instructions: u64,
    pub ipc: f64,
    pub load_use: u64,
    pub execution_use: u64,
    pub mul_busy: u64,
    pub div_busy: u64,
    pub write_done: u64,
    pub frontend_refill: u64,
    pub flush_cycles: u64,
    pub fill_cycles: u64,
    pub branches: u64,
    pub mispredictions: u64,
    pub mispredict_rate: f64,
    pub traps: u64,
    pub iterations: Option<u64>,
    pub timed_cycles: Option<u64>,
    pub score_per_mcycle: Option<f64>,
    /// Percent IPC change relative to the depth-5 core of the same width
    /// and ISA on the same workload.
    pub ipc_delta_vs_depth5_pct: Option<f64>,
    /// Cycles on the I core divided by cycles on the IM core; depth 5 only.
    pub i_over_im_cycles: Option<f64>,
}

impl ReportRow {
    pub fn new(workload: &str, config: CoreConfig, outcome: RunOutcome, stats: &RunStats) -> Self {
        let s = &stats.stall_cycles;
        ReportRow {
            workload: workload.to_string(),
            variant: config.variant_name(),
            xlen: config.xlen.bits(),
            isa: config.isa.to_string(),
            depth: config.depth.into(),
            outcome: outcome_name(outcome).to_string(),
            exit_code: outcome.exit_code(),
            cycles: stats.cycles,
            instructions: stats.instructions_retired,
            ipc: stats.ipc(),
            load_use: s.load_use,
            execution_use: s.execution_use,
            mul_busy: s.mul_busy,
            div_busy: s.div_busy,
            write_done: s.write_done,
            frontend_refill: s.frontend_refill,
            flush_cycles: stats.flush_cycles,
            fill_cycles: stats.fill_cycles,
            branches: stats.branches,
            mispredictions: stats.mispredictions,
            mispredict_rate: stats.mispredict_rate(),
            traps: stats.traps,
            iterations: None,
            timed_cycles: None,
            score_per_mcycle: None,
            ipc_delta_vs_depth5_pct: None,
            i_over_im_cycles: None,
        }
    }

    pub fn stall_total(&self) -> u64 {
        self.load_use + self.execution_use + self.mul_busy + self.div_busy + self.write_done + self.frontend_refill
    }
}

fn outcome_name(o: RunOutcome) -> &'static str {
    match o {
        RunOutcome::Exited { .. } => "exited",
        RunOutcome::CycleLimit { .. } => "cycle_limit",
        RunOutcome::UnmappedFetch { .. } => "unmapped_fetch",
        RunOutcome::TrapLoop { .. } => "trap_loop",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub rows: Vec<ReportRow>,
}

impl Default for SweepReport {
    fn default() -> Self {
        SweepReport { schema_version: SCHEMA_VERSION, rows: Vec::new() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported report schema version {0}")]
    Schema(u32),
}

impl SweepReport {
    pub fn new(rows: Vec<ReportRow>) -> Self {
        SweepReport { schema_version: SCHEMA_VERSION, rows }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(csv_header()).unwrap();
        for row in &self.rows {
            w.serialize(row).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn from_csv(text: &str) -> Result<Self, ReportError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows = r.deserialize().collect::<Result<Vec<ReportRow>, _>>()?;
        Ok(SweepReport::new(rows))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap();
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let r: SweepReport = serde_json::from_str(text)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(ReportError::Schema(r.schema_version));
        }
        Ok(r)
    }

    pub fn to_table(&self) -> String {
        let opt = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |v| format!("{v:.prec$}"));
        let header = [
            "workload", "variant", "cycles", "instrs", "ipc", "stalls", "flush", "mispred%", "score/Mcyc", "dIPC%",
            "I/IM",
        ];
        let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for r in &self.rows {
            cells.push(vec![
                r.workload.clone(),
                r.variant.clone(),
                r.cycles.to_string(),
                r.instructions.to_string(),
                format!("{:.4}", r.ipc),
                r.stall_total().to_string(),
                r.flush_cycles.to_string(),
                format!("{:.2}", r.mispredict_rate * 100.0),
                opt(r.score_per_mcycle, 2),
                opt(r.ipc_delta_vs_depth5_pct, 2),
                opt(r.i_over_im_cycles, 3),
            ]);
        }
        let widths: Vec<usize> =
            (0..header.len()).map(|c| cells.iter().map(|row| row[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (i, row) in cells.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, v)| if c < 2 { format!("{v:<w$}", w = widths[c]) } else { format!("{v:>w$}", w = widths[c]) })
                .collect();
            writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
            if i == 0 {
                writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ")).unwrap();
            }
        }
        out
    }
}

/// Column names in output order.
pub fn csv_header() -> Vec<&'static str> {
    vec![
        "workload",
        "variant",
        "xlen",
        "isa",
        "depth",
        "outcome",
        "exit_code",
        "cycles",
        "instructions",
        "ipc",
        "load_use",
        "execution_use",
        "mul_busy",
        "div_busy",
        "write_done",
        "frontend_refill",
        "flush_cycles",
        "fill_cycles",
        "branches",
        "mispredictions",
        "mispredict_rate",
        "traps",
        "iterations",
        "timed_cycles",
        "score_per_mcycle",
        "ipc_delta_vs_depth5_pct",
        "i_over_im_cycles",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        let csv = SweepReport::default().to_csv();
        assert_eq!(csv.lines().count(), 1);
        assert_eq!(csv.trim_end().split(',').collect::<Vec<_>>(), csv_header());
        assert_eq!(SweepReport::from_csv(&csv).unwrap(), SweepReport::default());
    }

    #[test]
    fn header_matches_row_fields() {
        let cfg = CoreConfig::all()[0];
        let row = ReportRow::new("w", cfg, RunOutcome::Exited { code: 0 }, &RunStats::default());
        let v = serde_json::to_value(&row).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        let mut want: Vec<_> = csv_header().iter().map(|s| s.to_string()).collect();
        want.sort();
        let mut keys = keys;
        keys.sort();
        assert_eq!(keys, want);
    }

    #[test]
    fn rejects_other_schema_versions() {
        let text = SweepReport::default().to_json().replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(matches!(SweepReport::from_json(&text), Err(ReportError::Schema(9))));
    }
}
