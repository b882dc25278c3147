use std::fmt::Write;

use mabfuzz_core::fuzzer::Strategy;

use crate::summary::Summary;

/// Shown where a bug was not detected, so no number is invented.
pub const NOT_DETECTED: &str = "—";

/// One row per bug: the baseline's median tests-to-detect, then the
/// speedup of each bandit algorithm present, in the order egreedy, ucb,
/// exp3.
pub fn emit_table(summary: &Summary) -> String {
    let columns: Vec<Strategy> = Strategy::BANDITS
        .into_iter()
        .filter(|s| summary.algorithm(*s).is_some())
        .collect();
    let baseline = summary.algorithm(Strategy::Fifo);

    let mut header = vec!["bug".to_string(), "fifo #tests".to_string()];
    header.extend(columns.iter().map(|s| s.name().to_string()));

    let bugs: Vec<_> = summary
        .algorithms
        .first()
        .map(|a| a.detection.keys().copied().collect())
        .unwrap_or_default();
    let mut rows = Vec::new();
    for bug in bugs {
        let mut row = vec![bug.to_string()];
        row.push(
            baseline
                .and_then(|b| b.detection[&bug].median_tests)
                .map_or(NOT_DETECTED.to_string(), format_count),
        );
        for s in &columns {
            let cell = summary
                .algorithm(*s)
                .and_then(|a| a.detection[&bug].speedup_vs_fifo);
            row.push(cell.map_or(NOT_DETECTED.to_string(), |x| format!("{x:.2}x")));
        }
        rows.push(row);
    }

    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].chars().count())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        writeln!(out, "{}", padded.join("  ").trim_end()).unwrap();
    };
    line(&mut out, &header);
    for row in &rows {
        line(&mut out, row);
    }
    out
}

/// Medians of two trials can end in .5.
fn format_count(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.1}")
    }
}
