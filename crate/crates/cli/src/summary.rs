use std::collections::BTreeMap;

use mabfuzz_core::dut::BugId;
use mabfuzz_core::fuzzer::{speedup, CampaignReport, Strategy};
use serde::{Deserialize, Serialize};

use crate::format::round6;
use crate::CliError;

/// Aggregates over the trials of every algorithm, plus comparisons with
/// the FIFO baseline when it was part of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub budget: u64,
    pub trials: u32,
    pub seeds: Vec<u64>,
    pub bugs: String,
    pub universe_size: usize,
    pub algorithms: Vec<AlgorithmSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Strategy,
    pub detection: BTreeMap<BugId, BugSummary>,
    pub final_coverage: CoverageSummary,
    /// Median over trials of the per-trial coverage speedup against the
    /// baseline run with the same seed.
    pub coverage_speedup_vs_fifo: Option<f64>,
    /// Median over trials of the final-coverage difference, in percentage
    /// points.
    pub coverage_increment_pp: Option<f64>,
    pub resets: ResetSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugSummary {
    /// Median first-detection index; trials that missed the bug count as
    /// later than any detection, so a median among misses is absent.
    pub median_tests: Option<f64>,
    pub per_trial: Vec<Option<u64>>,
    /// Baseline median over this algorithm's median.
    pub speedup_vs_fifo: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub median_points: f64,
    pub median_percent: f64,
    pub per_trial: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetSummary {
    pub median: f64,
    pub per_trial: Vec<u64>,
}

/// Median where `None` sorts after every value.
pub fn median_of(values: &[Option<u64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by_key(|x| x.unwrap_or(u64::MAX));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2].map(|x| x as f64)
    } else {
        Some((v[n / 2 - 1]? as f64 + v[n / 2]? as f64) / 2.0)
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

impl Summary {
    /// `runs` holds one entry per algorithm, each with its trial reports in
    /// seed order.
    pub fn from_runs(runs: &[(Strategy, Vec<CampaignReport>)]) -> Result<Summary, CliError> {
        let first = runs
            .iter()
            .flat_map(|(_, r)| r.first())
            .next()
            .ok_or_else(|| CliError::Usage("no campaigns were run".into()))?;
        let baseline = runs
            .iter()
            .find(|(s, _)| *s == Strategy::Fifo)
            .map(|(_, r)| r.as_slice());

        let baseline_medians: Option<BTreeMap<BugId, Option<f64>>> = baseline.map(|reports| {
            first
                .bugs
                .iter()
                .map(|bug| (bug, median_of(&detections(reports, bug))))
                .collect()
        });

        let mut algorithms = Vec::new();
        for (strategy, reports) in runs {
            let mut detection = BTreeMap::new();
            for bug in first.bugs.iter() {
                let per_trial = detections(reports, bug);
                let median_tests = median_of(&per_trial);
                let speedup_vs_fifo = match (&baseline_medians, median_tests) {
                    (Some(base), Some(m)) => base[&bug].map(|b| round6(b / m)),
                    _ => None,
                };
                detection.insert(
                    bug,
                    BugSummary {
                        median_tests: median_tests.map(round6),
                        per_trial,
                        speedup_vs_fifo,
                    },
                );
            }

            let coverage: Vec<usize> = reports.iter().map(|r| r.final_coverage()).collect();
            let points: Vec<f64> = coverage.iter().map(|c| *c as f64).collect();
            let median_points = median(&points);

            let (mut cov_speedups, mut increments) = (Vec::new(), Vec::new());
            if let Some(base) = baseline {
                for (b, t) in base.iter().zip(reports) {
                    let s = speedup(b, t)?;
                    if let Some(c) = s.coverage {
                        cov_speedups.push(c);
                    }
                    increments.push(s.coverage_increment);
                }
            }
            let resets: Vec<u64> = reports.iter().map(|r| r.resets).collect();
            let reset_counts: Vec<f64> = resets.iter().map(|r| *r as f64).collect();

            algorithms.push(AlgorithmSummary {
                algorithm: *strategy,
                detection,
                final_coverage: CoverageSummary {
                    median_points: round6(median_points),
                    median_percent: round6(100.0 * median_points / first.universe_size as f64),
                    per_trial: coverage,
                },
                coverage_speedup_vs_fifo: (!cov_speedups.is_empty())
                    .then(|| round6(median(&cov_speedups))),
                coverage_increment_pp: (!increments.is_empty())
                    .then(|| round6(median(&increments))),
                resets: ResetSummary {
                    median: round6(median(&reset_counts)),
                    per_trial: resets,
                },
            });
        }

        Ok(Summary {
            budget: first.budget,
            trials: runs.iter().map(|(_, r)| r.len()).max().unwrap_or(0) as u32,
            seeds: runs[0].1.iter().map(|r| r.rng_seed).collect(),
            bugs: first.bugs.to_string(),
            universe_size: first.universe_size,
            algorithms,
        })
    }

    pub fn algorithm(&self, strategy: Strategy) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|a| a.algorithm == strategy)
    }
}

fn detections(reports: &[CampaignReport], bug: BugId) -> Vec<Option<u64>> {
    reports.iter().map(|r| r.detection_index(bug)).collect()
}
