use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Strategy;
use crate::dut::{BugConfig, BugId, Mismatch};
use crate::testgen::{Test, TestId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResetReason {
    /// Saturation monitor fired.
    Sat,
    /// The arm's pool was empty when it was selected.
    Empty,
}

impl fmt::Display for ResetReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResetReason::Sat => "sat",
            ResetReason::Empty => "empty",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based test index.
    pub t: u64,
    pub arm_id: usize,
    pub test_id: TestId,
    pub reward: f64,
    pub new_local: usize,
    pub new_global: usize,
    /// Global coverage after this test.
    pub cum_cov: usize,
    /// Resets performed during this iteration, in order.
    pub resets: Vec<ResetReason>,
    /// Distinct bugs detected so far, this test included.
    pub bugs_detected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// 1-based index of the first test exposing the bug.
    pub test_index: u64,
    pub test: Test,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub strategy: Strategy,
    pub rng_seed: u64,
    pub bugs: BugConfig,
    pub budget: u64,
    pub universe_size: usize,
    pub records: Vec<IterationRecord>,
    pub detections: BTreeMap<BugId, Detection>,
    pub resets: u64,
}

impl CampaignReport {
    pub fn tests_run(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn final_coverage(&self) -> usize {
        self.records.last().map_or(0, |r| r.cum_cov)
    }

    pub fn final_coverage_percent(&self) -> f64 {
        100.0 * self.final_coverage() as f64 / self.universe_size as f64
    }

    pub fn detection_index(&self, bug: BugId) -> Option<u64> {
        self.detections.get(&bug).map(|d| d.test_index)
    }

    /// Number of tests needed to reach `coverage` points, if ever reached.
    pub fn tests_to_reach(&self, coverage: usize) -> Option<u64> {
        if coverage == 0 {
            return Some(0);
        }
        self.records
            .iter()
            .find(|r| r.cum_cov >= coverage)
            .map(|r| r.t)
    }

    /// Writes `<bug>.bin` (the triggering test as little-endian words) and
    /// `<bug>.txt` (one mismatch per line) for every detection.
    pub fn export_reproducers(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (bug, detection) in &self.detections {
            let bin = dir.join(format!("{bug}.bin"));
            detection
                .test
                .write_binary(io::BufWriter::new(fs::File::create(&bin)?))?;
            let txt = dir.join(format!("{bug}.txt"));
            let mut out = io::BufWriter::new(fs::File::create(&txt)?);
            writeln!(out, "bug {bug}: {}", bug.description())?;
            writeln!(
                out,
                "test index {} (id {})",
                detection.test_index, detection.test.id
            )?;
            writeln!(out, "step,field,dut,golden")?;
            for m in &detection.mismatches {
                writeln!(
                    out,
                    "{},{},{},{}",
                    m.step, m.field, m.dut_value, m.golden_value
                )?;
            }
            out.flush()?;
            written.push(bin);
            written.push(txt);
        }
        Ok(written)
    }
}
