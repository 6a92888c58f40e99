//! CSV tables with a metadata digest header and JSON sidecars.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Result, RunError};

/// Column-oriented numeric table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// Column names with their units.
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>, U: Into<String>>(columns: impl IntoIterator<Item = (S, U)>) -> Self {
        Self {
            columns: columns.into_iter().map(|(n, u)| (n.into(), u.into())).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the columns");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|(n, _)| n == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Float with 17 significant digits.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// CSV text: a `#` comment block (title lines, metadata digest, column
/// units), the header row and the data rows.
pub fn render_csv(title: &[(String, String)], digest: &str, table: &Table) -> String {
    let mut out = String::new();
    for (k, v) in title {
        let _ = writeln!(out, "# {k}: {v}");
    }
    let _ = writeln!(out, "# metadata_sha256: {digest}");
    let units: Vec<String> = table.columns.iter().map(|(n, u)| format!("{n} [{u}]")).collect();
    let _ = writeln!(out, "# units: {}", units.join(", "));
    let names: Vec<&str> = table.columns.iter().map(|(n, _)| n.as_str()).collect();
    let _ = writeln!(out, "{}", names.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|x| format_value(*x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Parse CSV text written by [`render_csv`] back into a table, ignoring units.
pub fn parse_csv(text: &str) -> Option<Table> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next()?;
    let mut table = Table::new(header.split(',').map(|n| (n.to_string(), String::new())));
    for line in lines {
        let row: Option<Vec<f64>> = line.split(',').map(|c| c.parse().ok()).collect();
        table.rows.push(row?);
    }
    Some(table)
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.display().to_string(),
        source,
    })
}

/// Sidecar path next to a CSV file: `name.csv` becomes `name.meta.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("metadata serializes")
}
