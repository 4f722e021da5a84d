//! Report files and terminal summaries.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use tca_core::catalog::{catalog, GrammarEntry};

use crate::run::Report;

/// Write `<kind>.json` and `<kind>.csv` into `dir`.
pub fn write(dir: &Path, report: &Report) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let json_path = dir.join(format!("{}.json", report.kind));
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(&json_path, text).with_context(|| format!("cannot write {}", json_path.display()))?;

    let csv_path = dir.join(format!("{}.csv", report.kind));
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("cannot write {}", csv_path.display()))?;
    w.write_record(&report.csv_header)?;
    for row in &report.csv_rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// One PASS/FAIL line, then one line per violated identity.
pub fn summarize(report: &Report) {
    println!("{} {} {}", report.verdict, report.kind, report.subject);
    for f in &report.failures {
        println!("  violated {}: residual {:e} at {}", f.identity, f.residual, f.witness);
    }
}

fn section(out: &mut impl Write, title: &str, entries: &[GrammarEntry]) -> std::io::Result<()> {
    writeln!(out, "{title}:")?;
    let width = entries.iter().map(|e| e.form.len()).max().unwrap_or(0);
    for e in entries {
        writeln!(out, "  {:width$}  {}", e.form, e.meaning)?;
    }
    Ok(())
}

pub fn print_catalog(json: bool) -> Result<()> {
    let c = catalog();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if json {
        serde_json::to_writer_pretty(&mut out, &c)?;
        writeln!(out)?;
        return Ok(());
    }
    section(&mut out, "groups", &c.groups)?;
    section(&mut out, "models", &c.models)?;
    section(&mut out, "actions", &c.actions)?;
    section(&mut out, "cocycles", &c.cocycles)?;
    section(&mut out, "weights", &c.weights)?;
    section(&mut out, "norms", &c.norms)?;
    section(&mut out, "systems", &c.systems)?;
    Ok(())
}
