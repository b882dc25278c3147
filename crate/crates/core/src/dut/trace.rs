use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ArchState, BugId, ExcCause};

/// State after one executed instruction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Address of the executed instruction.
    pub pc: u32,
    pub state: ArchState,
    /// Bug whose trigger fired on this instruction (DUT only).
    pub bug: Option<BugId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecTrace {
    entries: Vec<TraceEntry>,
}

impl ExecTrace {
    pub fn push(&mut self, entry: TraceEntry) {
        self.entries.push(entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn last(&self) -> Option<&TraceEntry> {
        self.entries.last()
    }

    /// Most recent bug that fired at or before `step`.
    pub fn bug_at_or_before(&self, step: usize) -> Option<BugId> {
        self.entries.iter().take(step + 1).rev().find_map(|e| e.bug)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    Pc,
    Reg(u8),
    Csr(u8),
    Instret,
    ExcCause,
    /// Number of executed instructions.
    TraceLength,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Pc => f.write_str("pc"),
            Field::Reg(r) => write!(f, "x{r}"),
            Field::Csr(c) => write!(f, "csr{c}"),
            Field::Instret => f.write_str("instret"),
            Field::ExcCause => f.write_str("exc_cause"),
            Field::TraceLength => f.write_str("trace_length"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Value {
    Word(u64),
    Exc(Option<ExcCause>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Word(v) => write!(f, "{v:#x}"),
            Value::Exc(Some(c)) => write!(f, "{c}"),
            Value::Exc(None) => f.write_str("none"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub step: usize,
    pub field: Field,
    pub dut_value: Value,
    pub golden_value: Value,
    /// Bug the DUT attributes to this divergence, for evaluation only.
    pub bug: Option<BugId>,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {} {}: dut={} golden={}",
            self.step, self.field, self.dut_value, self.golden_value
        )?;
        if let Some(bug) = self.bug {
            write!(f, " [{bug}]")?;
        }
        Ok(())
    }
}

/// Compares the traces entry by entry up to the shorter length, then reports
/// a length difference if there is one.
pub fn diff(dut: &ExecTrace, golden: &ExecTrace) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for (step, (d, g)) in dut.entries.iter().zip(&golden.entries).enumerate() {
        let bug = dut.bug_at_or_before(step);
        let mut push = |field, dut_value, golden_value| {
            out.push(Mismatch {
                step,
                field,
                dut_value,
                golden_value,
                bug,
            })
        };
        for (r, (dv, gv)) in d.state.regs.iter().zip(&g.state.regs).enumerate() {
            if dv != gv {
                push(
                    Field::Reg(r as u8),
                    Value::Word(*dv as u64),
                    Value::Word(*gv as u64),
                );
            }
        }
        if d.state.pc != g.state.pc {
            push(
                Field::Pc,
                Value::Word(d.state.pc as u64),
                Value::Word(g.state.pc as u64),
            );
        }
        for (c, (dv, gv)) in d.state.csrs.iter().zip(&g.state.csrs).enumerate() {
            if dv != gv {
                push(
                    Field::Csr(c as u8),
                    Value::Word(*dv as u64),
                    Value::Word(*gv as u64),
                );
            }
        }
        if d.state.instret != g.state.instret {
            push(
                Field::Instret,
                Value::Word(d.state.instret),
                Value::Word(g.state.instret),
            );
        }
        if d.state.exc_cause != g.state.exc_cause {
            push(
                Field::ExcCause,
                Value::Exc(d.state.exc_cause),
                Value::Exc(g.state.exc_cause),
            );
        }
    }
    if dut.len() != golden.len() {
        let step = dut.len().min(golden.len());
        out.push(Mismatch {
            step,
            field: Field::TraceLength,
            dut_value: Value::Word(dut.len() as u64),
            golden_value: Value::Word(golden.len() as u64),
            bug: dut.bug_at_or_before(step),
        });
    }
    out
}
