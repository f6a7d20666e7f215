//! Variant selection: register width, ISA profile and pipeline depth.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Register and datapath width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Xlen {
    X32,
    X64,
}

impl Xlen {
    pub fn bits(self) -> u32 {
        match self {
            Xlen::X32 => 32,
            Xlen::X64 => 64,
        }
    }

    /// Mask of the valid bits of a register value.
    pub fn mask(self) -> u64 {
        match self {
            Xlen::X32 => 0xFFFF_FFFF,
            Xlen::X64 => u64::MAX,
        }
    }

    /// Truncate a 64-bit container to this width. RV32 values are kept
    /// zero-extended in the container.
    #[inline]
    pub fn trunc(self, v: u64) -> u64 {
        v & self.mask()
    }

    /// Interpret a stored value as a signed integer of this width.
    #[inline]
    pub fn signed(self, v: u64) -> i64 {
        match self {
            Xlen::X32 => v as u32 as i32 as i64,
            Xlen::X64 => v as i64,
        }
    }
}

impl FromStr for Xlen {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "32" => Ok(Xlen::X32),
            "64" => Ok(Xlen::X64),
            _ => Err(ConfigError::BadXlen(s.to_string())),
        }
    }
}

impl fmt::Display for Xlen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

/// Base integer ISA, with or without the M extension. Zicsr is always present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Isa {
    I,
    IM,
}

impl Isa {
    pub fn has_m(self) -> bool {
        matches!(self, Isa::IM)
    }
}

impl FromStr for Isa {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "i" => Ok(Isa::I),
            "im" => Ok(Isa::IM),
            _ => Err(ConfigError::BadIsa(s.to_string())),
        }
    }
}

impl fmt::Display for Isa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Isa::I => "I",
            Isa::IM => "IM",
        })
    }
}

/// Pipeline depth, 5 to 8 stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Depth(u8);

impl Depth {
    pub const FIVE: Depth = Depth(5);
    pub const SIX: Depth = Depth(6);
    pub const SEVEN: Depth = Depth(7);
    pub const EIGHT: Depth = Depth(8);
    pub const ALL: [Depth; 4] = [Depth::FIVE, Depth::SIX, Depth::SEVEN, Depth::EIGHT];

    pub fn new(stages: u8) -> Result<Self, ConfigError> {
        if (5..=8).contains(&stages) {
            Ok(Depth(stages))
        } else {
            Err(ConfigError::BadDepth(stages))
        }
    }

    pub fn stages(self) -> usize {
        self.0 as usize
    }
}

impl TryFrom<u8> for Depth {
    type Error = ConfigError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Depth::new(v)
    }
}

impl From<Depth> for u8 {
    fn from(d: Depth) -> u8 {
        d.0
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One microarchitecture variant.
///
/// The ten official variants are the I/IM five-stage cores at both widths
/// plus the IM cores at depths 6, 7 and 8. I-only cores deeper than five
/// stages can only be built through [`CoreConfig::unofficial`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoreConfig {
    pub xlen: Xlen,
    pub isa: Isa,
    pub depth: Depth,
    official: bool,
}

impl CoreConfig {
    pub fn new(xlen: Xlen, isa: Isa, depth: Depth) -> Result<Self, ConfigError> {
        if isa == Isa::I && depth != Depth::FIVE {
            return Err(ConfigError::NoSuchVariant { xlen, isa, depth });
        }
        Ok(CoreConfig {
            xlen,
            isa,
            depth,
            official: true,
        })
    }

    /// Any (xlen, isa, depth) combination, including the ones that have no
    /// hardware counterpart. Such configs are flagged and their names carry
    /// a `-U` suffix.
    pub fn unofficial(xlen: Xlen, isa: Isa, depth: Depth) -> Self {
        CoreConfig {
            xlen,
            isa,
            depth,
            official: !(isa == Isa::I && depth != Depth::FIVE),
        }
    }

    pub fn is_official(&self) -> bool {
        self.official
    }

    /// Parse a designation such as `54F6SP`.
    pub fn from_variant(name: &str) -> Result<Self, ConfigError> {
        let upper = name.trim().to_ascii_uppercase();
        CoreConfig::all()
            .into_iter()
            .find(|c| c.variant_name() == upper)
            .ok_or_else(|| ConfigError::UnknownVariant(name.to_string()))
    }

    /// The ten official variants in table order.
    pub fn all() -> Vec<CoreConfig> {
        let mut out = Vec::with_capacity(10);
        for xlen in [Xlen::X32, Xlen::X64] {
            out.push(CoreConfig::new(xlen, Isa::I, Depth::FIVE).unwrap());
            for depth in Depth::ALL {
                out.push(CoreConfig::new(xlen, Isa::IM, depth).unwrap());
            }
        }
        out
    }

    /// Instruction-count prefix of the hardware designation.
    fn designation_count(&self) -> u32 {
        match (self.xlen, self.isa) {
            (Xlen::X32, Isa::I) => 46,
            (Xlen::X32, Isa::IM) => 54,
            (Xlen::X64, Isa::I) => 59,
            (Xlen::X64, Isa::IM) => 72,
        }
    }

    pub fn variant_name(&self) -> String {
        let base = format!("{}F{}SP", self.designation_count(), self.depth);
        if self.official {
            base
        } else {
            format!("{base}-U")
        }
    }
}

impl fmt::Display for CoreConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.variant_name())
    }
}

/// Tunables that are not part of the variant identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingOptions {
    /// Number of 2-bit counters in the direction predictor (power of two).
    pub predictor_entries: usize,
    /// Divider cycles spent outside the iterative loop (FSM entry and exit).
    pub div_overhead: u32,
    /// Total multiplier latency in cycles; the pipeline stalls for
    /// `mul_latency - 1` cycles.
    pub mul_latency: u32,
    /// Only charge the store-to-load `write_done` stall when the two
    /// accesses overlap. Off by default: the stall is charged whenever a
    /// load directly follows a store into MEM.
    pub write_done_address_compare: bool,
}

impl Default for TimingOptions {
    fn default() -> Self {
        TimingOptions {
            predictor_entries: 64,
            div_overhead: 2,
            mul_latency: 3,
            write_done_address_compare: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_variants_with_table_names() {
        let names: Vec<_> = CoreConfig::all().iter().map(|c| c.variant_name()).collect();
        assert_eq!(
            names,
            [
                "46F5SP", "54F5SP", "54F6SP", "54F7SP", "54F8SP", "59F5SP", "72F5SP", "72F6SP",
                "72F7SP", "72F8SP"
            ]
        );
    }

    #[test]
    fn variant_round_trip() {
        for c in CoreConfig::all() {
            assert_eq!(CoreConfig::from_variant(&c.variant_name()).unwrap(), c);
        }
        assert!(CoreConfig::from_variant("46F6SP").is_err());
        assert!(CoreConfig::from_variant("bogus").is_err());
    }

    #[test]
    fn deep_i_only_rejected() {
        for d in [Depth::SIX, Depth::SEVEN, Depth::EIGHT] {
            for x in [Xlen::X32, Xlen::X64] {
                assert!(CoreConfig::new(x, Isa::I, d).is_err());
                let u = CoreConfig::unofficial(x, Isa::I, d);
                assert!(!u.is_official());
                assert!(u.variant_name().ends_with("-U"));
            }
        }
        assert!(Depth::new(4).is_err());
        assert!(Depth::new(9).is_err());
    }
}
