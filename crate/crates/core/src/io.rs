//! Number formatting and small text writers shared by the CSV outputs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// Formats a number for CSV: plain decimal up to six significant digits,
/// shortest round-trip scientific notation beyond that.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let plain = format!("{x}");
    let digits = plain.trim_start_matches('-').chars().filter(|c| c.is_ascii_digit());
    let sig = digits.skip_while(|&c| c == '0').count();
    let mag = x.abs();
    if sig <= 6 && (1e-4..1e6).contains(&mag) {
        plain
    } else {
        format!("{x:e}")
    }
}

/// A CSV table with '#'-prefixed metadata lines above the header.
#[derive(Debug, Default, Clone)]
pub struct CsvTable {
    meta: Vec<String>,
    header: Vec<String>,
    rows: Vec<String>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            meta: Vec::new(),
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.meta.push(format!("{key}: {value}"));
        self
    }

    pub fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.header.len());
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        self.rows.push(line.join(","));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for m in &self.meta {
            let _ = writeln!(out, "# {m}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{r}");
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

pub enum Cell<'a> {
    Num(f64),
    Int(i64),
    Text(&'a str),
    Bool(bool),
}

impl Cell<'_> {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.to_string(),
            Cell::Bool(b) => if *b { "1" } else { "0" }.to_string(),
        }
    }
}
