use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A CSV table with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Field `name` of row `row`.
    pub fn get(&self, row: usize, name: &str) -> Option<&str> {
        Some(self.rows.get(row)?[self.column_index(name)?].as_str())
    }

    /// Field `name` of row `row` parsed as a number.
    pub fn value(&self, row: usize, name: &str) -> Option<f64> {
        self.get(row, name)?.parse().ok()
    }

    /// The CSV text; an optional `# generated-at` comment precedes the
    /// header.
    pub fn to_csv(&self, timestamp: Option<u64>) -> String {
        let mut out = String::new();
        if let Some(t) = timestamp {
            writeln!(out, "# generated-at {t}").unwrap();
        }
        writeln!(out, "{}", self.header.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }

    /// Parses text written by [`CsvTable::to_csv`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let header: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for line in lines {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != header.len() {
                return Err(Error::Parse(format!("row has {} fields, header has {}", row.len(), header.len())));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn write(&self, path: &Path, timestamp: Option<u64>) -> Result<()> {
        std::fs::write(path, self.to_csv(timestamp))?;
        Ok(())
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}
