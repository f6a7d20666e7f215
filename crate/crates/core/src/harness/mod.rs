//! Loading programs, running benchmarks and variant sweeps, and reporting.

pub mod bench;
pub mod config_file;
pub mod elf;
pub mod report;
pub mod suite;
pub mod sweep;

pub use bench::{parse_report, run_benchmark, BenchResult, Protocol, SelfReport};
pub use config_file::SettingsFile;
pub use elf::{is_elf, load_bin, load_elf};
pub use report::{csv_header, ReportError, ReportRow, SweepReport, SCHEMA_VERSION};
pub use suite::{bundled_suite_dir, load_suite, Workload, BUNDLED};
pub use sweep::{add_comparisons, sweep, SweepOptions};
