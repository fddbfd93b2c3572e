//! Tabular output: CSV with a commented header, optional JSON mirror.

use serde_json::{json, Value};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // shortest round-trip form, so reruns are byte-identical
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Provenance written at the top of every output.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub config_sha256: String,
    pub materials_version: String,
    pub materials_source: String,
}

/// A secondary block, such as resonance summaries; rendered as comments in CSV.
#[derive(Debug, Clone)]
pub struct Block {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub blocks: Vec<Block>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, prov: &Provenance) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {} {}", env!("CARGO_BIN_NAME"), env!("CARGO_PKG_VERSION"), prov.command);
        let _ = writeln!(out, "# config-sha256: {}", prov.config_sha256);
        let _ = writeln!(out, "# materials: {} ({})", prov.materials_version, prov.materials_source);
        for block in &self.blocks {
            let _ = writeln!(out, "# {}: {}", block.name, block.columns.join(","));
            for row in &block.rows {
                let _ = writeln!(out, "# {}", row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            }
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
        }
        out
    }

    pub fn to_json(&self, prov: &Provenance) -> Value {
        let rows = |rows: &[Vec<Cell>]| -> Vec<Value> {
            rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect()
        };
        let blocks: serde_json::Map<String, Value> = self
            .blocks
            .iter()
            .map(|b| (b.name.clone(), json!({ "columns": b.columns, "rows": rows(&b.rows) })))
            .collect();
        json!({
            "tool": env!("CARGO_BIN_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": prov.command,
            "config_sha256": prov.config_sha256,
            "materials_version": prov.materials_version,
            "materials_source": prov.materials_source,
            "columns": self.columns,
            "rows": rows(&self.rows),
            "blocks": blocks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            command: "debye".into(),
            config_sha256: "00".into(),
            materials_version: "1".into(),
            materials_source: "bundled".into(),
        }
    }

    #[test]
    fn csv_has_commented_header_then_columns() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Num(1.5e-9), "x,y".into()]);
        let csv = t.to_csv(&prov());
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[..3].iter().all(|l| l.starts_with('#')));
        assert_eq!(lines[3], "a,b");
        assert_eq!(lines[4], "1.5e-9,\"x,y\"");
    }

    #[test]
    fn json_mirror_carries_rows() {
        let mut t = Table::new(&["a"]);
        t.push(vec![Cell::Empty]);
        let v = t.to_json(&prov());
        assert_eq!(v["rows"][0][0], Value::Null);
        assert_eq!(v["command"], "debye");
    }
}
