//! Rendering of run records and rank summaries as text tables, CSV and JSON.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::run::RunRecord;
use crate::sweep::{summarize, SweepSummary, NVERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

fn non_empty(records: &[RunRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(HarnessError::EmptyInput);
    }
    Ok(())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per (run, candidate).
pub fn records_csv(records: &[RunRecord]) -> Result<String> {
    non_empty(records)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["J", "B", "M", "candidate", "tvd", "rank", "nversion_selected"])?;
    for r in records {
        let picked = r.nversion.selected_name();
        for c in &r.candidates {
            w.write_record([
                r.coupling.to_string(),
                r.field.to_string(),
                r.trotter_steps.to_string(),
                c.name.clone(),
                format!("{:.12e}", c.tvd),
                c.rank.to_string(),
                (c.name == picked).to_string(),
            ])?;
        }
    }
    finish_csv(w)
}

/// Columns `method,rank,count,M`; `M` is `all` for the aggregate rows.
pub fn summary_csv(summary: &SweepSummary) -> Result<String> {
    if summary.runs == 0 {
        return Err(HarnessError::EmptyInput);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "rank", "count", "M"])?;
    let mut steps: Vec<Option<u32>> = summary.rows.iter().map(|r| r.trotter_steps).collect();
    steps.sort_by_key(|m| (m.is_none(), *m));
    steps.dedup();
    for m in steps {
        for method in summary.methods() {
            let Some(row) = summary.row(method, m) else { continue };
            let m = m.map_or_else(|| "all".to_string(), |m| m.to_string());
            for (i, count) in row.counts.iter().enumerate() {
                w.write_record([method, &(i + 1).to_string(), &count.to_string(), &m])?;
            }
        }
    }
    finish_csv(w)
}

pub fn records_json(records: &[RunRecord]) -> Result<String> {
    non_empty(records)?;
    Ok(serde_json::to_string_pretty(records)?)
}

pub fn parse_records_json(text: &str) -> Result<Vec<RunRecord>> {
    let records: Vec<RunRecord> = serde_json::from_str(text)?;
    non_empty(&records)?;
    Ok(records)
}

pub fn summary_json(summary: &SweepSummary) -> Result<String> {
    if summary.runs == 0 {
        return Err(HarnessError::EmptyInput);
    }
    Ok(serde_json::to_string_pretty(summary)?)
}

fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

/// Place counts per method over all runs, then the N-version pick's rank
/// histogram for each `M`.
pub fn summary_table(summary: &SweepSummary) -> Result<String> {
    if summary.runs == 0 {
        return Err(HarnessError::EmptyInput);
    }
    let places = summary.n_candidates;
    let methods = summary.methods();
    let width = methods.iter().map(|m| m.len()).max().unwrap_or(0).max(6);
    let mut out = String::new();

    writeln!(out, "{} runs", summary.runs).unwrap();
    write!(out, "{:<width$}", "method").unwrap();
    for p in 1..=places {
        write!(out, "  {:>18}", format!("No. of {} places", ordinal(p))).unwrap();
    }
    out.push('\n');
    for method in &methods {
        let row = summary.row(method, None).expect("aggregate row per method");
        write!(out, "{method:<width$}").unwrap();
        for c in &row.counts {
            write!(out, "  {c:>18}").unwrap();
        }
        out.push('\n');
    }

    writeln!(out, "\n{NVERSION} rank by M").unwrap();
    write!(out, "{:>4}", "M").unwrap();
    for p in 1..=places {
        write!(out, "  {:>5}", ordinal(p)).unwrap();
    }
    out.push('\n');
    for row in summary
        .rows
        .iter()
        .filter(|r| r.method == NVERSION && r.trotter_steps.is_some())
    {
        write!(out, "{:>4}", row.trotter_steps.expect("filtered")).unwrap();
        for c in &row.counts {
            write!(out, "  {c:>5}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Table and JSON render the summary; CSV lists every candidate of every run.
pub fn render(records: &[RunRecord], format: ReportFormat) -> Result<String> {
    non_empty(records)?;
    match format {
        ReportFormat::Table => summary_table(&summarize(records)),
        ReportFormat::Csv => records_csv(records),
        ReportFormat::Json => summary_json(&summarize(records)),
    }
}
