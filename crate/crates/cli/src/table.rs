//! CSV emission with a fixed number format so reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = self.header.join(",");
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.header.len() {
                return Err(CliError::Validation {
                    field: format!("row {i}"),
                    message: format!("has {} values for {} columns", row.len(), self.header.len()),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                // 17 significant digits round-trip every f64.
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        Ok(out)
    }
}

pub fn export_table(table: &Table, path: &Path) -> Result<(), CliError> {
    let text = table.to_csv()?;
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
