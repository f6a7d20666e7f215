//! Simulator settings file.
//!
//! A flat TOML table; every key is optional:
//!
//! ```toml
//! imem_base = 0x0
//! imem_size = 0x10000
//! dmem_base = 0x10000
//! dmem_size = 0x10000
//! mmio_base = 0x10000000
//! predictor_entries = 64
//! div_overhead = 2
//! write_done_address_compare = false
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::config::TimingOptions;
use crate::error::ConfigError;
use crate::memory::MemoryMap;

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsFile {
    pub imem_base: Option<u64>,
    pub imem_size: Option<u64>,
    pub dmem_base: Option<u64>,
    pub dmem_size: Option<u64>,
    pub mmio_base: Option<u64>,
    pub predictor_entries: Option<usize>,
    pub div_overhead: Option<u32>,
    pub write_done_address_compare: Option<bool>,
}

impl SettingsFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::File(e.message().to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Overlay the keys that are present onto `map` and `timing`.
    pub fn apply(&self, map: &mut MemoryMap, timing: &mut TimingOptions) -> Result<(), ConfigError> {
        let set = |dst: &mut u64, v: Option<u64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut map.imem_base, self.imem_base);
        set(&mut map.imem_size, self.imem_size);
        set(&mut map.dmem_base, self.dmem_base);
        set(&mut map.dmem_size, self.dmem_size);
        set(&mut map.mmio_base, self.mmio_base);
        if let Some(n) = self.predictor_entries {
            if n == 0 || !n.is_power_of_two() {
                return Err(ConfigError::BadPredictorSize(n));
            }
            timing.predictor_entries = n;
        }
        if let Some(d) = self.div_overhead {
            timing.div_overhead = d;
        }
        if let Some(c) = self.write_done_address_compare {
            timing.write_done_address_compare = c;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_only_given_keys() {
        let f = SettingsFile::parse("dmem_base = 0x20000\npredictor_entries = 16\nwrite_done_address_compare = true\n").unwrap();
        let (mut map, mut t) = (MemoryMap::default(), TimingOptions::default());
        f.apply(&mut map, &mut t).unwrap();
        assert_eq!(map.dmem_base, 0x20000);
        assert_eq!(map.imem_size, MemoryMap::default().imem_size);
        assert_eq!((t.predictor_entries, t.div_overhead, t.write_done_address_compare), (16, 2, true));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_sizes() {
        assert!(SettingsFile::parse("dmem = 1").is_err());
        let f = SettingsFile::parse("predictor_entries = 12").unwrap();
        assert_eq!(
            f.apply(&mut MemoryMap::default(), &mut TimingOptions::default()),
            Err(ConfigError::BadPredictorSize(12))
        );
    }
}
