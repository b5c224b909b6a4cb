//! CSV tables with fixed 17-significant-digit formatting and JSON sidecars.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Failure;

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// A finished table plus whether any row failed to converge.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub failed: bool,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            failed: false,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> Result<Vec<u8>, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(Failure::runtime)?;
        for r in &self.rows {
            w.write_record(r).map_err(Failure::runtime)?;
        }
        w.into_inner().map_err(Failure::runtime)
    }
}

#[derive(Serialize)]
struct Sidecar<'a, C: Serialize, S: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    summary: &'a S,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Writes the table to `out` (stdout when absent) and, with a path, the
/// sidecar next to it.
pub fn emit<C: Serialize, S: Serialize>(
    out: Option<&Path>,
    command: &str,
    config: &C,
    summary: &S,
    table: &Table,
) -> Result<(), Failure> {
    let csv = table.render()?;
    match out {
        None => {
            std::io::stdout().write_all(&csv)?;
        }
        Some(path) => {
            std::fs::write(path, csv)?;
            let side = Sidecar {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command,
                config,
                summary,
            };
            let mut json = serde_json::to_string_pretty(&side).map_err(Failure::runtime)?;
            json.push('\n');
            std::fs::write(sidecar_path(path), json)?;
        }
    }
    Ok(())
}
