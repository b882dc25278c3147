//! The fuzzing target: a toy processor with injectable bugs, a bug-free
//! reference model, and the differential comparator between them.

mod core;
pub mod directed;
mod golden;
pub mod isa;
mod sites;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coverage::CoverageSet;

pub use self::core::ToyCore;
pub use golden::GoldenModel;
pub use sites::{Site, COVERAGE_POINTS, NUM_SITES};
pub use trace::{diff, ExecTrace, Field as StateField, Mismatch, TraceEntry};

pub const NUM_REGS: usize = 16;
pub const NUM_CSRS: usize = 4;
/// CSR ids come from the low bits of the immediate; ids at or above
/// [`NUM_CSRS`] are unimplemented.
pub const CSR_ID_MASK: i32 = 0x7;
pub const DATA_WORDS: u32 = 256;
pub const STEP_CAP: usize = 1000;
/// Value leaked by an unimplemented CSR read under [`BugId::B6`].
pub const CSR_X_VALUE: u32 = 0xDEAD_BEEF;
/// Opcode value that [`BugId::B2`] lets through decode.
pub const B2_OPCODE: u32 = 62;
/// LUI places its immediate at this bit offset.
pub const LUI_SHIFT: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExcCause {
    IllegalInstr,
    InvalidAddr,
    Break,
}

impl fmt::Display for ExcCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExcCause::IllegalInstr => "ILLEGAL_INSTR",
            ExcCause::InvalidAddr => "INVALID_ADDR",
            ExcCause::Break => "BREAK",
        })
    }
}

/// Architectural state compared between the DUT and the reference model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArchState {
    pub regs: [u32; NUM_REGS],
    pub pc: u32,
    pub csrs: [u32; NUM_CSRS],
    pub instret: u64,
    pub exc_cause: Option<ExcCause>,
}

impl ArchState {
    pub fn reset() -> Self {
        ArchState {
            regs: [0; NUM_REGS],
            pc: 0,
            csrs: [0; NUM_CSRS],
            instret: 0,
            exc_cause: None,
        }
    }

    pub fn halted(&self) -> bool {
        self.exc_cause.is_some()
    }

    pub(crate) fn write_reg(&mut self, rd: u8, value: u32) {
        if rd != 0 {
            self.regs[rd as usize] = value;
        }
    }
}

impl Default for ArchState {
    fn default() -> Self {
        Self::reset()
    }
}

/// Word-addressed data memory; instructions live in a separate read-only
/// region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memory {
    data: Vec<u32>,
}

impl Memory {
    pub fn new() -> Self {
        Memory {
            data: vec![0; DATA_WORDS as usize],
        }
    }

    pub fn load(&self, addr: u32) -> Option<u32> {
        self.data.get(addr as usize).copied()
    }

    pub fn store(&mut self, addr: u32, value: u32) -> bool {
        match self.data.get_mut(addr as usize) {
            Some(slot) => {
                *slot = value;
                true
            }
            None => false,
        }
    }
}

impl Default for Memory {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BugId {
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    B7,
}

impl BugId {
    pub const ALL: [BugId; 7] = [
        BugId::B1,
        BugId::B2,
        BugId::B3,
        BugId::B4,
        BugId::B5,
        BugId::B6,
        BugId::B7,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn description(self) -> &'static str {
        match self {
            BugId::B1 => "fence.i with rd != 0 decoded as addi",
            BugId::B2 => "illegal opcode 62 executes as a no-op",
            BugId::B3 => "invalid address reported as illegal instruction when csr0 != 0",
            BugId::B4 => "load right after a store to the same word reads the old value",
            BugId::B5 => "load from an invalid address returns 0 without an exception",
            BugId::B6 => "unimplemented csr reads return 0xdeadbeef",
            BugId::B7 => "ebreak does not increment instret",
        }
    }
}

impl fmt::Display for BugId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}", self.index() + 1)
    }
}

impl FromStr for BugId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BugId::ALL
            .iter()
            .copied()
            .find(|b| b.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown bug id {s:?} (expected B1..B7)"))
    }
}

/// The set of injected bugs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BugConfig {
    mask: u8,
}

impl BugConfig {
    pub fn none() -> Self {
        BugConfig { mask: 0 }
    }

    pub fn all() -> Self {
        BugConfig { mask: 0x7F }
    }

    pub fn only(bug: BugId) -> Self {
        BugConfig {
            mask: 1 << bug.index(),
        }
    }

    pub fn with(mut self, bug: BugId) -> Self {
        self.mask |= 1 << bug.index();
        self
    }

    pub fn is_enabled(&self, bug: BugId) -> bool {
        self.mask & (1 << bug.index()) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = BugId> + '_ {
        BugId::ALL.into_iter().filter(|b| self.is_enabled(*b))
    }
}

impl FromIterator<BugId> for BugConfig {
    fn from_iter<I: IntoIterator<Item = BugId>>(iter: I) -> Self {
        iter.into_iter().fold(BugConfig::none(), BugConfig::with)
    }
}

impl fmt::Display for BugConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.iter().map(|b| b.to_string()).collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join(","))
        }
    }
}

impl FromStr for BugConfig {
    type Err = String;

    /// Accepts `all`, `none`, or a comma list such as `B1,B7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(BugConfig::all()),
            "none" | "" => Ok(BugConfig::none()),
            _ => s.split(',').map(str::parse).collect(),
        }
    }
}

/// Everything one test execution produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub coverage: CoverageSet,
    pub dut_trace: ExecTrace,
    pub golden_trace: ExecTrace,
}

impl RunOutcome {
    pub fn mismatches(&self) -> Vec<Mismatch> {
        diff(&self.dut_trace, &self.golden_trace)
    }
}

/// Runs `words` on both machines from the reset state until halt, the pc
/// leaves the program, or [`STEP_CAP`] instructions have executed.
pub fn run_test(words: &[u32], bugs: BugConfig) -> RunOutcome {
    let mut coverage = CoverageSet::new(COVERAGE_POINTS);
    let dut_trace = ToyCore::new(bugs).run(words, &mut coverage);
    let golden_trace = GoldenModel::new().run(words);
    RunOutcome {
        coverage,
        dut_trace,
        golden_trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bug_config_parsing() {
        assert_eq!("all".parse::<BugConfig>().unwrap(), BugConfig::all());
        let cfg: BugConfig = "B1, b7".parse().unwrap();
        assert!(cfg.is_enabled(BugId::B1) && cfg.is_enabled(BugId::B7));
        assert_eq!(cfg.iter().count(), 2);
        assert_eq!(cfg.to_string(), "B1,B7");
        assert!("B8".parse::<BugConfig>().is_err());
        assert_eq!(BugConfig::all().iter().count(), 7);
    }

    #[test]
    fn memory_bounds() {
        let mut m = Memory::new();
        assert!(m.store(255, 9));
        assert_eq!(m.load(255), Some(9));
        assert!(!m.store(256, 1));
        assert_eq!(m.load(300), None);
    }
}
