use super::isa::{decode, Decoded, Instruction, Opcode};
use super::trace::{ExecTrace, TraceEntry};
use super::{ArchState, ExcCause, Memory, CSR_ID_MASK, LUI_SHIFT, NUM_CSRS, STEP_CAP};

/// Bug-free reference semantics of the toy ISA.
#[derive(Debug, Clone, Default)]
pub struct GoldenModel {
    state: ArchState,
    mem: Memory,
}

impl GoldenModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> &ArchState {
        &self.state
    }

    pub fn run(mut self, program: &[u32]) -> ExecTrace {
        let mut trace = ExecTrace::default();
        let end = 4 * program.len() as u64;
        while trace.len() < STEP_CAP && (self.state.pc as u64) < end {
            let pc = self.state.pc;
            let word = program[(pc / 4) as usize];
            self.state = step_golden(&self.state, &mut self.mem, decode(word));
            trace.push(TraceEntry {
                pc,
                state: self.state.clone(),
                bug: None,
            });
            if self.state.halted() {
                break;
            }
        }
        trace
    }
}

/// Executes one instruction against the reference semantics.
pub fn step_golden(state: &ArchState, mem: &mut Memory, decoded: Decoded) -> ArchState {
    let mut next = state.clone();
    let ins = match decoded {
        Decoded::Legal(ins) => ins,
        Decoded::Illegal { .. } => return raise(next, ExcCause::IllegalInstr),
    };
    let Instruction {
        opcode,
        rd,
        rs1,
        rs2,
        imm,
    } = ins;
    let a = state.regs[rs1 as usize];
    let b = state.regs[rs2 as usize];
    let uimm = imm as u32;
    let mut next_pc = state.pc.wrapping_add(4);

    match opcode {
        Opcode::Add => next.write_reg(rd, a.wrapping_add(b)),
        Opcode::Sub => next.write_reg(rd, a.wrapping_sub(b)),
        Opcode::And => next.write_reg(rd, a & b),
        Opcode::Or => next.write_reg(rd, a | b),
        Opcode::Xor => next.write_reg(rd, a ^ b),
        Opcode::Slt => next.write_reg(rd, ((a as i32) < (b as i32)) as u32),
        Opcode::Addi => next.write_reg(rd, a.wrapping_add(uimm)),
        Opcode::Andi => next.write_reg(rd, a & uimm),
        Opcode::Ori => next.write_reg(rd, a | uimm),
        Opcode::Lui => next.write_reg(rd, uimm << LUI_SHIFT),
        Opcode::Lw => match mem.load(a.wrapping_add(uimm)) {
            Some(v) => next.write_reg(rd, v),
            None => return raise(next, ExcCause::InvalidAddr),
        },
        Opcode::Sw => {
            if !mem.store(a.wrapping_add(uimm), b) {
                return raise(next, ExcCause::InvalidAddr);
            }
        }
        Opcode::Beq | Opcode::Bne => {
            let taken = (a == b) == (opcode == Opcode::Beq);
            if taken {
                next_pc = state.pc.wrapping_add(uimm.wrapping_mul(4));
            }
        }
        Opcode::Jal => {
            next.write_reg(rd, state.pc.wrapping_add(4));
            next_pc = state.pc.wrapping_add(uimm.wrapping_mul(4));
        }
        Opcode::Csrrw => {
            let id = (imm & CSR_ID_MASK) as usize;
            if id >= NUM_CSRS {
                return raise(next, ExcCause::IllegalInstr);
            }
            let old = state.csrs[id];
            next.csrs[id] = a;
            next.write_reg(rd, old);
        }
        Opcode::Ebreak => {
            next.instret += 1;
            next.exc_cause = Some(ExcCause::Break);
            return next;
        }
        Opcode::FenceI => {}
    }
    next.pc = next_pc;
    next.instret += 1;
    next
}

fn raise(mut state: ArchState, cause: ExcCause) -> ArchState {
    state.exc_cause = Some(cause);
    state
}
