use super::isa::{opcode_bits, sign_extend_imm, Opcode, RD_SHIFT, REG_MASK, RS1_SHIFT, RS2_SHIFT};
use super::sites::{Site, BANK_WORDS, NUM_BANKS, RESULT_OPS, SIGNED_OPS};
use super::trace::{ExecTrace, TraceEntry};
use super::{
    ArchState, BugConfig, BugId, ExcCause, Memory, B2_OPCODE, CSR_ID_MASK, CSR_X_VALUE, LUI_SHIFT,
    NUM_CSRS, NUM_REGS, STEP_CAP,
};
use crate::coverage::CoverageSet;

/// Records both outcomes of a conditional and passes the condition through.
fn branch(cov: &mut CoverageSet, site: Site, cond: bool) -> bool {
    cov.insert(site.point(cond));
    cond
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PendingStore {
    addr: u32,
    old: u32,
}

/// The device under test: an instrumented interpreter with injectable bugs.
#[derive(Debug, Clone)]
pub struct ToyCore {
    state: ArchState,
    mem: Memory,
    bugs: BugConfig,
    /// Store retired by the previous instruction, for the stale-read bug.
    pending_store: Option<PendingStore>,
    /// Register written by the previous instruction, for the hazard probes.
    last_rd: Option<u8>,
}

enum Outcome {
    Retire,
    Fault(ExcCause),
}

impl ToyCore {
    pub fn new(bugs: BugConfig) -> Self {
        ToyCore {
            state: ArchState::reset(),
            mem: Memory::new(),
            bugs,
            pending_store: None,
            last_rd: None,
        }
    }

    pub fn state(&self) -> &ArchState {
        &self.state
    }

    pub fn run(mut self, program: &[u32], cov: &mut CoverageSet) -> ExecTrace {
        let mut trace = ExecTrace::default();
        if program.is_empty() {
            return trace;
        }
        let end = 4 * program.len() as u64;
        while branch(cov, Site::STEP_BUDGET_LEFT, trace.len() < STEP_CAP) {
            let pc = self.state.pc;
            let bug = self.step(program[(pc / 4) as usize], cov);
            trace.push(TraceEntry {
                pc,
                state: self.state.clone(),
                bug,
            });
            if self.state.halted() {
                break;
            }
            if !branch(cov, Site::PC_IN_PROGRAM, (self.state.pc as u64) < end) {
                break;
            }
        }
        trace
    }

    /// Executes one word; returns the bug whose trigger fired, if any.
    pub fn step(&mut self, word: u32, cov: &mut CoverageSet) -> Option<BugId> {
        debug_assert!(!self.state.halted());
        let pending = self.pending_store.take();
        let prev_rd = self.last_rd.take();
        let mut fired = None;

        let bits = opcode_bits(word);
        let opcode = Opcode::ALL
            .into_iter()
            .find(|op| branch(cov, Site::decode(*op), bits == op.bits()));

        let Some(opcode) = opcode else {
            if branch(cov, Site::ILLEGAL_IS_B2, bits == B2_OPCODE) && self.enabled(BugId::B2) {
                self.retire(self.state.pc.wrapping_add(4));
                return Some(BugId::B2);
            }
            self.state.exc_cause = Some(ExcCause::IllegalInstr);
            return None;
        };

        let rd = ((word >> RD_SHIFT) & REG_MASK) as u8;
        let rs1 = ((word >> RS1_SHIFT) & REG_MASK) as u8;
        let rs2 = ((word >> RS2_SHIFT) & REG_MASK) as u8;
        let imm = sign_extend_imm(word);
        let uimm = imm as u32;
        let a = self.state.regs[rs1 as usize];
        let b = self.state.regs[rs2 as usize];
        let pc = self.state.pc;
        let mut next_pc = pc.wrapping_add(4);
        branch(cov, Site::rs1_hazard(opcode), prev_rd == Some(rs1));
        branch(cov, Site::rs2_hazard(opcode), prev_rd == Some(rs2));

        let outcome = match opcode {
            Opcode::Add => {
                let r = a.wrapping_add(b);
                branch(
                    cov,
                    Site::overflow(opcode),
                    (((a ^ r) & (b ^ r)) as i32) < 0,
                );
                self.alu(cov, opcode, rd, r)
            }
            Opcode::Sub => {
                let r = a.wrapping_sub(b);
                branch(
                    cov,
                    Site::overflow(opcode),
                    (((a ^ b) & (a ^ r)) as i32) < 0,
                );
                self.alu(cov, opcode, rd, r)
            }
            Opcode::And => self.alu(cov, opcode, rd, a & b),
            Opcode::Or => self.alu(cov, opcode, rd, a | b),
            Opcode::Xor => self.alu(cov, opcode, rd, a ^ b),
            Opcode::Slt => self.alu(cov, opcode, rd, ((a as i32) < (b as i32)) as u32),
            Opcode::Addi => {
                let r = a.wrapping_add(uimm);
                branch(
                    cov,
                    Site::overflow(opcode),
                    (((a ^ r) & (uimm ^ r)) as i32) < 0,
                );
                self.alu(cov, opcode, rd, r)
            }
            Opcode::Andi => self.alu(cov, opcode, rd, a & uimm),
            Opcode::Ori => self.alu(cov, opcode, rd, a | uimm),
            Opcode::Lui => self.alu(cov, opcode, rd, uimm << LUI_SHIFT),
            Opcode::Lw => {
                let addr = a.wrapping_add(uimm);
                if branch(cov, Site::LW_IN_RANGE, self.mem.load(addr).is_some()) {
                    for bank in 0..NUM_BANKS {
                        branch(
                            cov,
                            Site::lw_bank(bank),
                            (addr / BANK_WORDS) as usize == bank,
                        );
                    }
                    let mut value = self.mem.load(addr).unwrap_or_default();
                    let forwarded = pending.filter(|p| p.addr == addr);
                    if branch(cov, Site::LW_AFTER_SW_SAME_ADDR, forwarded.is_some())
                        && self.enabled(BugId::B4)
                    {
                        value = forwarded.map_or(value, |p| p.old);
                        fired = Some(BugId::B4);
                    }
                    self.write_rd(cov, rd, value);
                    Outcome::Retire
                } else if self.enabled(BugId::B5) {
                    fired = Some(BugId::B5);
                    self.write_rd(cov, rd, 0);
                    Outcome::Retire
                } else {
                    Outcome::Fault(ExcCause::InvalidAddr)
                }
            }
            Opcode::Sw => {
                let addr = a.wrapping_add(uimm);
                if branch(cov, Site::SW_IN_RANGE, self.mem.load(addr).is_some()) {
                    for bank in 0..NUM_BANKS {
                        branch(
                            cov,
                            Site::sw_bank(bank),
                            (addr / BANK_WORDS) as usize == bank,
                        );
                    }
                    let old = self.mem.load(addr).unwrap_or_default();
                    self.mem.store(addr, b);
                    self.pending_store = Some(PendingStore { addr, old });
                    Outcome::Retire
                } else {
                    Outcome::Fault(ExcCause::InvalidAddr)
                }
            }
            Opcode::Beq => {
                if branch(cov, Site::BEQ_TAKEN, a == b) {
                    branch(cov, Site::BACKWARD_TARGET, imm < 0);
                    next_pc = pc.wrapping_add(uimm.wrapping_mul(4));
                }
                Outcome::Retire
            }
            Opcode::Bne => {
                if branch(cov, Site::BNE_TAKEN, a != b) {
                    branch(cov, Site::BACKWARD_TARGET, imm < 0);
                    next_pc = pc.wrapping_add(uimm.wrapping_mul(4));
                }
                Outcome::Retire
            }
            Opcode::Jal => {
                self.write_rd(cov, rd, pc.wrapping_add(4));
                branch(cov, Site::BACKWARD_TARGET, imm < 0);
                next_pc = pc.wrapping_add(uimm.wrapping_mul(4));
                Outcome::Retire
            }
            Opcode::Csrrw => {
                let id = (imm & CSR_ID_MASK) as usize;
                if branch(cov, Site::CSR_IMPLEMENTED, id < NUM_CSRS) {
                    for csr in 0..NUM_CSRS {
                        branch(cov, Site::csr_decode(csr), id == csr);
                    }
                    let old = self.state.csrs[id];
                    self.state.csrs[id] = a;
                    self.write_rd(cov, rd, old);
                    Outcome::Retire
                } else if self.enabled(BugId::B6) {
                    fired = Some(BugId::B6);
                    self.write_rd(cov, rd, CSR_X_VALUE);
                    Outcome::Retire
                } else {
                    Outcome::Fault(ExcCause::IllegalInstr)
                }
            }
            Opcode::Ebreak => {
                if self.enabled(BugId::B7) {
                    fired = Some(BugId::B7);
                } else {
                    self.state.instret += 1;
                }
                self.state.exc_cause = Some(ExcCause::Break);
                return fired;
            }
            Opcode::FenceI => {
                if branch(cov, Site::FENCEI_RD_NONZERO, rd != 0) && self.enabled(BugId::B1) {
                    fired = Some(BugId::B1);
                    self.write_rd(cov, rd, a.wrapping_add(uimm));
                }
                Outcome::Retire
            }
        };

        match outcome {
            Outcome::Retire => self.retire(next_pc),
            Outcome::Fault(cause) => {
                self.pending_store = None;
                if cause == ExcCause::InvalidAddr
                    && branch(cov, Site::FAULT_WITH_CSR0_SET, self.state.csrs[0] != 0)
                    && self.enabled(BugId::B3)
                {
                    fired = Some(BugId::B3);
                    self.state.exc_cause = Some(ExcCause::IllegalInstr);
                } else {
                    self.state.exc_cause = Some(cause);
                }
            }
        }
        fired
    }

    fn enabled(&self, bug: BugId) -> bool {
        self.bugs.is_enabled(bug)
    }

    fn retire(&mut self, next_pc: u32) {
        self.state.pc = next_pc;
        self.state.instret += 1;
    }

    fn alu(&mut self, cov: &mut CoverageSet, op: Opcode, rd: u8, value: u32) -> Outcome {
        debug_assert!(RESULT_OPS.contains(&op));
        branch(cov, Site::result_zero(op), value == 0);
        if SIGNED_OPS.contains(&op) {
            branch(cov, Site::result_negative(op), (value as i32) < 0);
        }
        self.write_rd(cov, rd, value);
        Outcome::Retire
    }

    fn write_rd(&mut self, cov: &mut CoverageSet, rd: u8, value: u32) {
        if !branch(cov, Site::WRITE_RD_ZERO, rd == 0) {
            for reg in 1..NUM_REGS as u8 {
                branch(cov, Site::rd_decode(reg), rd == reg);
            }
            self.state.regs[rd as usize] = value;
            self.last_rd = Some(rd);
        }
    }
}
