//! Fixtures shared by the criterion benches.

use rvpipe_core::harness::{bundled_suite_dir, load_suite, Workload};
use rvpipe_core::{CoreConfig, MemoryMap, ProgramImage};

/// Bundled workloads, loaded once per bench binary.
pub fn workloads() -> Vec<Workload> {
    load_suite(&bundled_suite_dir(), &MemoryMap::default()).expect("bundled suite present")
}

/// Image of `name` for `variant`.
pub fn image<'a>(workloads: &'a [Workload], name: &str, variant: &str) -> (CoreConfig, &'a ProgramImage) {
    let config = CoreConfig::from_variant(variant).expect("known variant");
    let w = workloads.iter().find(|w| w.name == name).expect("known workload");
    (config, w.image_for(config).expect("build for variant"))
}
