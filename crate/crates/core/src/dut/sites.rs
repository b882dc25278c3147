//! Branch-coverage sites of the DUT. Each site is a two-way conditional and
//! owns two points: `2·site` (not taken) and `2·site + 1` (taken).

use super::isa::Opcode;
use super::{DATA_WORDS, NUM_CSRS, NUM_REGS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site(pub u16);

/// ALU-style opcodes whose result is probed for zero and sign.
pub(crate) const RESULT_OPS: [Opcode; 10] = [
    Opcode::Add,
    Opcode::Sub,
    Opcode::And,
    Opcode::Or,
    Opcode::Xor,
    Opcode::Slt,
    Opcode::Addi,
    Opcode::Andi,
    Opcode::Ori,
    Opcode::Lui,
];

/// Result opcodes whose value can have its sign bit set (SLT yields 0 or 1).
pub(crate) const SIGNED_OPS: [Opcode; 9] = [
    Opcode::Add,
    Opcode::Sub,
    Opcode::And,
    Opcode::Or,
    Opcode::Xor,
    Opcode::Addi,
    Opcode::Andi,
    Opcode::Ori,
    Opcode::Lui,
];

/// Opcodes with a signed-overflow detector.
pub(crate) const OVERFLOW_OPS: [Opcode; 3] = [Opcode::Add, Opcode::Sub, Opcode::Addi];

/// Data memory is decoded in banks of this many words.
pub const BANK_WORDS: u32 = 16;
pub const NUM_BANKS: usize = (DATA_WORDS / BANK_WORDS) as usize;

const N_OPS: u16 = Opcode::ALL.len() as u16;
const DECODE_BASE: u16 = 0;
const RESULT_ZERO_BASE: u16 = DECODE_BASE + N_OPS;
const RESULT_NEG_BASE: u16 = RESULT_ZERO_BASE + RESULT_OPS.len() as u16;
const OVERFLOW_BASE: u16 = RESULT_NEG_BASE + SIGNED_OPS.len() as u16;
const RD_DECODE_BASE: u16 = OVERFLOW_BASE + OVERFLOW_OPS.len() as u16;
const RS1_HAZARD_BASE: u16 = RD_DECODE_BASE + (NUM_REGS as u16 - 1);
const RS2_HAZARD_BASE: u16 = RS1_HAZARD_BASE + N_OPS;
const LW_BANK_BASE: u16 = RS2_HAZARD_BASE + N_OPS;
const SW_BANK_BASE: u16 = LW_BANK_BASE + NUM_BANKS as u16;
const CSR_DECODE_BASE: u16 = SW_BANK_BASE + NUM_BANKS as u16;
const MISC_BASE: u16 = CSR_DECODE_BASE + NUM_CSRS as u16;

impl Site {
    /// `opcode == op` in the decode chain.
    pub fn decode(op: Opcode) -> Site {
        Site(DECODE_BASE + op as u16)
    }

    pub fn result_zero(op: Opcode) -> Site {
        Site(RESULT_ZERO_BASE + slot(&RESULT_OPS, op))
    }

    pub fn result_negative(op: Opcode) -> Site {
        Site(RESULT_NEG_BASE + slot(&SIGNED_OPS, op))
    }

    pub fn overflow(op: Opcode) -> Site {
        Site(OVERFLOW_BASE + slot(&OVERFLOW_OPS, op))
    }

    /// Write-port decode `rd == reg`, for `reg` in `1..16`.
    pub fn rd_decode(reg: u8) -> Site {
        assert!((1..NUM_REGS as u8).contains(&reg));
        Site(RD_DECODE_BASE + reg as u16 - 1)
    }

    /// `op` reads rs1 from the register the previous instruction wrote.
    pub fn rs1_hazard(op: Opcode) -> Site {
        Site(RS1_HAZARD_BASE + op as u16)
    }

    pub fn rs2_hazard(op: Opcode) -> Site {
        Site(RS2_HAZARD_BASE + op as u16)
    }

    /// In-range load hits data bank `bank`.
    pub fn lw_bank(bank: usize) -> Site {
        assert!(bank < NUM_BANKS);
        Site(LW_BANK_BASE + bank as u16)
    }

    pub fn sw_bank(bank: usize) -> Site {
        assert!(bank < NUM_BANKS);
        Site(SW_BANK_BASE + bank as u16)
    }

    /// Implemented CSR select `id == csr`.
    pub fn csr_decode(csr: usize) -> Site {
        assert!(csr < NUM_CSRS);
        Site(CSR_DECODE_BASE + csr as u16)
    }

    /// Illegal opcode equals the B2 opcode.
    pub const ILLEGAL_IS_B2: Site = Site(MISC_BASE);
    /// FENCE.I with a nonzero rd field.
    pub const FENCEI_RD_NONZERO: Site = Site(MISC_BASE + 1);
    /// Register write targets x0.
    pub const WRITE_RD_ZERO: Site = Site(MISC_BASE + 2);
    pub const LW_IN_RANGE: Site = Site(MISC_BASE + 3);
    pub const SW_IN_RANGE: Site = Site(MISC_BASE + 4);
    /// Load hits the word stored by the immediately preceding instruction.
    pub const LW_AFTER_SW_SAME_ADDR: Site = Site(MISC_BASE + 5);
    /// csr0 is nonzero while an invalid-address exception is raised.
    pub const FAULT_WITH_CSR0_SET: Site = Site(MISC_BASE + 6);
    pub const BEQ_TAKEN: Site = Site(MISC_BASE + 7);
    pub const BNE_TAKEN: Site = Site(MISC_BASE + 8);
    pub const CSR_IMPLEMENTED: Site = Site(MISC_BASE + 9);
    /// Next pc still inside the program.
    pub const PC_IN_PROGRAM: Site = Site(MISC_BASE + 10);
    /// Step budget left before fetching.
    pub const STEP_BUDGET_LEFT: Site = Site(MISC_BASE + 11);
    /// A taken branch or jump goes backwards.
    pub const BACKWARD_TARGET: Site = Site(MISC_BASE + 12);

    pub fn point(self, taken: bool) -> usize {
        2 * self.0 as usize + taken as usize
    }
}

fn slot(table: &[Opcode], op: Opcode) -> u16 {
    table
        .iter()
        .position(|o| *o == op)
        .unwrap_or_else(|| panic!("{op:?} has no probe here")) as u16
}

pub const NUM_SITES: usize = MISC_BASE as usize + 13;
/// Size of the coverage universe `|C|`.
pub const COVERAGE_POINTS: usize = 2 * NUM_SITES;
