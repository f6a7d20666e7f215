/// Direct-mapped table of 2-bit saturating counters, untagged.
///
/// Counter values: 0 strong not-taken, 1 weak not-taken, 2 weak taken,
/// 3 strong taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchPredictor {
    counters: Vec<u8>,
}

pub const WEAK_NOT_TAKEN: u8 = 1;

impl BranchPredictor {
    /// `entries` must be a power of two.
    pub fn new(entries: usize) -> Self {
        assert!(entries.is_power_of_two(), "predictor size {entries} is not a power of two");
        BranchPredictor { counters: vec![WEAK_NOT_TAKEN; entries] }
    }

    pub fn entries(&self) -> usize {
        self.counters.len()
    }

    fn index(&self, pc: u64) -> usize {
        (pc >> 2) as usize & (self.counters.len() - 1)
    }

    pub fn counter(&self, pc: u64) -> u8 {
        self.counters[self.index(pc)]
    }

    pub fn predict(&self, pc: u64) -> bool {
        self.counter(pc) >= 2
    }

    pub fn update(&mut self, pc: u64, taken: bool) {
        let i = self.index(pc);
        let c = &mut self.counters[i];
        *c = if taken { (*c + 1).min(3) } else { c.saturating_sub(1) };
    }
}
