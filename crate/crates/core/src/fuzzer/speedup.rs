use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::report::CampaignReport;
use crate::dut::BugId;
use crate::error::{Error, Result};

/// Detection comparison for one bug. A ratio only exists when both sides
/// detected the bug.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BugSpeedup {
    Both {
        base: u64,
        treatment: u64,
        ratio: f64,
    },
    BaseOnly {
        base: u64,
    },
    TreatmentOnly {
        treatment: u64,
    },
    Neither,
}

impl BugSpeedup {
    pub fn between(base: Option<u64>, treatment: Option<u64>) -> Self {
        match (base, treatment) {
            (Some(b), Some(t)) => BugSpeedup::Both {
                base: b,
                treatment: t,
                ratio: b as f64 / t as f64,
            },
            (Some(b), None) => BugSpeedup::BaseOnly { base: b },
            (None, Some(t)) => BugSpeedup::TreatmentOnly { treatment: t },
            (None, None) => BugSpeedup::Neither,
        }
    }

    pub fn ratio(&self) -> Option<f64> {
        match self {
            BugSpeedup::Both { ratio, .. } => Some(*ratio),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Speedup {
    pub per_bug: BTreeMap<BugId, BugSpeedup>,
    /// Tests the baseline needs to reach the common coverage level divided
    /// by the tests the treatment needs.
    pub coverage: Option<f64>,
    /// Final coverage difference in percentage points of `|C|`.
    pub coverage_increment: f64,
}

/// Compares `treatment` against `base`.
///
/// The coverage level used for the coverage speedup is the lower of the two
/// final coverages, so both campaigns reach it.
pub fn speedup(base: &CampaignReport, treatment: &CampaignReport) -> Result<Speedup> {
    if base.bugs != treatment.bugs {
        return Err(Error::IncomparableReports(format!(
            "bug sets differ ({} vs {})",
            base.bugs, treatment.bugs
        )));
    }
    if base.budget != treatment.budget {
        return Err(Error::IncomparableReports(format!(
            "budgets differ ({} vs {})",
            base.budget, treatment.budget
        )));
    }
    if base.universe_size != treatment.universe_size {
        return Err(Error::IncomparableReports(
            "coverage universes differ".into(),
        ));
    }

    let per_bug = base
        .bugs
        .iter()
        .map(|bug| {
            (
                bug,
                BugSpeedup::between(base.detection_index(bug), treatment.detection_index(bug)),
            )
        })
        .collect();

    let level = base.final_coverage().min(treatment.final_coverage());
    let coverage = match (base.tests_to_reach(level), treatment.tests_to_reach(level)) {
        (Some(b), Some(t)) if b > 0 && t > 0 => Some(b as f64 / t as f64),
        _ => None,
    };
    let coverage_increment = treatment.final_coverage_percent() - base.final_coverage_percent();

    Ok(Speedup {
        per_bug,
        coverage,
        coverage_increment,
    })
}
