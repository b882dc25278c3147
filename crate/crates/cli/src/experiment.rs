use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mabfuzz_core::fuzzer::{run_campaign, CampaignReport, Strategy};
use rayon::prelude::*;

use crate::config::ExperimentSpec;
use crate::format::sig6;
use crate::summary::Summary;
use crate::table::emit_table;
use crate::CliError;

pub const CSV_HEADER: &str =
    "t,arm_id,reward,new_local,new_global,cum_cov,reset,bugs_detected,reset_reason";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TABLE_FILE: &str = "table.txt";
pub const REPRO_DIR: &str = "repro";

/// What a finished experiment leaves behind.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub table: String,
    pub files: Vec<PathBuf>,
}

pub fn curve_file_name(strategy: Strategy, trial: u32) -> String {
    format!("curve_{}_{trial}.csv", strategy.name())
}

/// Runs every campaign of `spec` and writes curves, reproducers, the
/// summary and the table under `spec.out`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    fs::create_dir_all(&spec.out).map_err(CliError::io(&spec.out))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = spec.jobs {
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;

    let grid = spec.campaigns();
    let results: Vec<(Strategy, u32, Vec<PathBuf>, CampaignReport)> = pool.install(|| {
        grid.par_iter()
            .map(|&(strategy, trial)| {
                let report = run_campaign(&spec.campaign(strategy, trial))?;
                let files = write_campaign(&spec.out, strategy, trial, &report)?;
                Ok((strategy, trial, files, report))
            })
            .collect::<Result<_, CliError>>()
    })?;

    let mut files = Vec::new();
    let mut runs: Vec<(Strategy, Vec<CampaignReport>)> =
        spec.algorithms.iter().map(|s| (*s, Vec::new())).collect();
    for (strategy, _, written, report) in results {
        files.extend(written);
        let slot = runs
            .iter_mut()
            .find(|(s, _)| *s == strategy)
            .expect("strategy in grid");
        slot.1.push(report);
    }

    let summary = Summary::from_runs(&runs)?;
    let summary_path = spec.out.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&summary_path, json + "\n").map_err(CliError::io(&summary_path))?;
    files.push(summary_path);

    let table = emit_table(&summary);
    let table_path = spec.out.join(TABLE_FILE);
    fs::write(&table_path, &table).map_err(CliError::io(&table_path))?;
    files.push(table_path);

    Ok(Outcome {
        summary,
        table,
        files,
    })
}

fn write_campaign(
    out: &Path,
    strategy: Strategy,
    trial: u32,
    report: &CampaignReport,
) -> Result<Vec<PathBuf>, CliError> {
    let path = out.join(curve_file_name(strategy, trial));
    let file = fs::File::create(&path).map_err(CliError::io(&path))?;
    write_curve(BufWriter::new(file), report).map_err(CliError::io(&path))?;

    let repro = out
        .join(REPRO_DIR)
        .join(format!("{}_{trial}", strategy.name()));
    let mut files = vec![path];
    if !report.detections.is_empty() {
        files.extend(
            report
                .export_reproducers(&repro)
                .map_err(CliError::io(&repro))?,
        );
    }
    Ok(files)
}

/// One row per test. `reset_reason` is `sat`, `empty`, `empty+sat` when
/// both happened in the same iteration, or empty.
pub fn write_curve<W: Write>(mut out: W, report: &CampaignReport) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &report.records {
        let reasons: Vec<String> = r.resets.iter().map(|x| x.to_string()).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t,
            r.arm_id,
            sig6(r.reward),
            r.new_local,
            r.new_global,
            r.cum_cov,
            u8::from(!r.resets.is_empty()),
            r.bugs_detected,
            reasons.join("+"),
        )?;
    }
    out.flush()
}
