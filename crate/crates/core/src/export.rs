//! Plain CSV tables with full-precision scientific number formatting.

use std::fmt::Write as _;

/// Formats a float in round-trippable scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// A numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Renders with LF line endings and a trailing newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| sci(*v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}
