//! CSV emission for sweep results.
//!
//! Layout: the schema line, one `# ` line per provenance entry, a column
//! header, then one row per result. Timing columns are the only
//! nondeterministic fields.

use std::io::Write;

use crate::error::Result;

use super::grid::{GridRow, StorageRow};

pub const CSV_SCHEMA: &str = "#hashlearn-csv-v1";

pub const GRID_COLUMNS: [&str; 9] = [
    "method",
    "k",
    "b",
    "C",
    "accuracy",
    "accuracy_sd",
    "train_seconds",
    "load_seconds",
    "preprocess_seconds",
];

pub const STORAGE_COLUMNS: [&str; 8] = [
    "method",
    "k",
    "b",
    "bits_per_example",
    "bits_per_example_16",
    "best_C",
    "accuracy",
    "trials",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn preamble<W: Write>(w: &mut W, provenance: &[String], columns: &[&str]) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA}")?;
    for line in provenance {
        for part in line.lines() {
            writeln!(w, "# {part}")?;
        }
    }
    writeln!(w, "{}", columns.join(","))?;
    Ok(())
}

pub fn write_grid_csv<W: Write>(mut w: W, provenance: &[String], rows: &[GridRow]) -> Result<()> {
    preamble(&mut w, provenance, &GRID_COLUMNS)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            r.method,
            opt(r.k),
            opt(r.b),
            r.c,
            r.accuracy(),
            r.accuracy_sd(),
            r.train_seconds,
            r.load_seconds,
            r.preprocess_seconds
        )?;
    }
    Ok(())
}

pub fn write_storage_csv<W: Write>(mut w: W, provenance: &[String], trials: usize, rows: &[StorageRow]) -> Result<()> {
    preamble(&mut w, provenance, &STORAGE_COLUMNS)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.method,
            opt(r.k),
            opt(r.b),
            opt(r.bits_per_example),
            opt(r.bits_per_example_16),
            r.best_c,
            r.accuracy,
            trials
        )?;
    }
    Ok(())
}
