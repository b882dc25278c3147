//! Hand-written programs: one trigger per injected bug, plus a corpus that
//! reaches the branch points random tests rarely hit.

use super::isa::{encode_fields, Instruction, Opcode};
use super::sites::{BANK_WORDS, NUM_BANKS};
use super::{BugId, B2_OPCODE};

fn ins(op: Opcode, rd: u8, rs1: u8, rs2: u8, imm: i32) -> u32 {
    Instruction::new(op, rd, rs1, rs2, imm).encode()
}

/// A program that exposes one bug, and the trace step of the instruction
/// that triggers it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedTest {
    pub bug: BugId,
    pub words: Vec<u32>,
    pub trigger_step: usize,
}

pub fn trigger(bug: BugId) -> DirectedTest {
    use Opcode::*;
    let (words, trigger_step) = match bug {
        // x1 = 5, then fence.i x2, x1, 3 writes 8 into x2
        BugId::B1 => (vec![ins(Addi, 1, 0, 0, 5), ins(FenceI, 2, 1, 0, 3)], 1),
        BugId::B2 => (
            vec![ins(Addi, 1, 0, 0, 1), encode_fields(B2_OPCODE, 0, 0, 0, 0)],
            1,
        ),
        // csr0 = 1, then a store far outside data memory
        BugId::B3 => (
            vec![
                ins(Addi, 1, 0, 0, 1),
                ins(Csrrw, 0, 1, 0, 0),
                ins(Sw, 0, 0, 1, 300),
            ],
            2,
        ),
        BugId::B4 => (
            vec![
                ins(Addi, 1, 0, 0, 7),
                ins(Sw, 0, 0, 1, 10),
                ins(Lw, 2, 0, 0, 10),
            ],
            2,
        ),
        BugId::B5 => (vec![ins(Lw, 1, 0, 0, -1)], 0),
        BugId::B6 => (vec![ins(Csrrw, 1, 0, 0, 7)], 0),
        BugId::B7 => (vec![ins(Ebreak, 0, 0, 0, 0)], 0),
    };
    DirectedTest {
        bug,
        words,
        trigger_step,
    }
}

/// Programs for the corner points: every memory bank and CSR select,
/// signed overflow on each adder, zero and sign results, the step cap,
/// faults with and without csr0 set, and the store-then-load pair.
pub fn corner_programs() -> Vec<Vec<u32>> {
    use Opcode::*;
    let mut programs: Vec<Vec<u32>> = BugId::ALL.iter().map(|b| trigger(*b).words).collect();

    for bank in 0..NUM_BANKS {
        let base = (bank as u32 * BANK_WORDS) as i32;
        programs.push(vec![
            ins(Addi, 1, 0, 0, base),
            ins(Sw, 0, 1, 1, 0),
            ins(Lw, 2, 1, 0, 0),
        ]);
    }
    for csr in 0..8 {
        programs.push(vec![ins(Csrrw, 1, 0, 0, csr)]);
    }

    // x1 = 0x07ffc000, doubled until the fifth add overflows
    let mut adds = vec![ins(Lui, 1, 0, 0, 0x1FFF)];
    adds.extend((0..5).map(|_| ins(Add, 1, 1, 1, 0)));
    programs.push(adds);

    // x2 = 0x7ffc0000, x4 = -2^27; x4 - x2 overflows
    let mut subs = vec![ins(Lui, 2, 0, 0, 0x1FFF)];
    subs.extend((0..4).map(|_| ins(Add, 2, 2, 2, 0)));
    subs.push(ins(Lui, 4, 0, 0, -8192));
    subs.push(ins(Sub, 5, 4, 2, 0));
    programs.push(subs);

    // x2 = 0x7fffdfff, then addi by 8191 twice
    let mut addis = vec![ins(Lui, 2, 0, 0, 0x1FFF)];
    addis.extend((0..4).map(|_| ins(Add, 2, 2, 2, 0)));
    addis.extend([
        ins(Lui, 3, 0, 0, 15),
        ins(Add, 2, 2, 3, 0),
        ins(Ori, 2, 2, 0, 0x1FFF),
        ins(Addi, 2, 2, 0, 0x1FFF),
        ins(Addi, 2, 2, 0, 0x1FFF),
    ]);
    programs.push(addis);

    // zero and negative results for every result opcode
    programs.push(vec![
        ins(Addi, 1, 0, 0, -1),
        ins(Add, 2, 0, 0, 0),
        ins(Add, 2, 1, 0, 0),
        ins(Sub, 2, 0, 0, 0),
        ins(Sub, 2, 0, 1, 0),
        ins(And, 2, 0, 1, 0),
        ins(And, 2, 1, 1, 0),
        ins(Or, 2, 0, 0, 0),
        ins(Or, 2, 1, 0, 0),
        ins(Xor, 2, 1, 1, 0),
        ins(Xor, 2, 1, 0, 0),
        ins(Slt, 2, 0, 0, 0),
        ins(Slt, 2, 1, 0, 0),
        ins(Addi, 2, 0, 0, 0),
        ins(Andi, 2, 1, 0, 0),
        ins(Andi, 2, 1, 0, -1),
        ins(Ori, 2, 0, 0, 0),
        ins(Ori, 2, 0, 0, -1),
        ins(Lui, 2, 0, 0, 0),
        ins(Lui, 2, 0, 0, -1),
    ]);

    // self loop runs into the step cap
    programs.push(vec![ins(Beq, 0, 0, 0, 0)]);
    // backward branch and jump
    programs.push(vec![
        ins(Addi, 1, 0, 0, 1),
        ins(Bne, 0, 1, 0, 2),
        ins(Ebreak, 0, 0, 0, 0),
        ins(Addi, 1, 0, 0, 0),
        ins(Beq, 0, 0, 0, -3),
    ]);
    programs.push(vec![
        ins(Jal, 1, 0, 0, 2),
        ins(Ebreak, 0, 0, 0, 0),
        ins(Jal, 0, 0, 0, -1),
    ]);
    // invalid store with csr0 clear
    programs.push(vec![ins(Sw, 0, 0, 0, -1)]);
    // fence.i with rd = 0 and an illegal opcode other than the bug's
    programs.push(vec![ins(FenceI, 0, 0, 0, 0), encode_fields(63, 0, 0, 0, 0)]);

    // every opcode reading the register the previous instruction wrote
    for op in Opcode::ALL {
        programs.push(vec![ins(Addi, 3, 0, 0, 1), ins(op, 4, 3, 3, 1)]);
    }
    programs
}
