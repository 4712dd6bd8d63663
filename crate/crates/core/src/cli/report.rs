//! Deterministic report rendering.
//!
//! Floats are printed with 9 significant digits, in scientific notation when
//! `|x| < 1e-3` or `|x| >= 1e6`, trailing zeros trimmed. JSON is emitted by
//! hand so that field order and number text are fixed.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    UInt(u64),
    Num(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

/// Rows sharing one column list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub results: Table,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n");
        let _ = writeln!(s, "  \"command\": {},", json_string(&self.command));
        let _ = writeln!(
            s,
            "  \"inputs_digest\": {},",
            json_string(&self.inputs_digest)
        );
        s.push_str("  \"results\": [");
        for (i, row) in self.results.rows.iter().enumerate() {
            s.push_str(if i == 0 { "\n" } else { ",\n" });
            s.push_str("    {");
            for (j, (col, cell)) in self.results.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{}: {}", json_string(col), json_cell(cell));
            }
            s.push('}');
        }
        s.push_str(if self.results.rows.is_empty() {
            "],\n"
        } else {
            "\n  ],\n"
        });
        s.push_str("  \"warnings\": [");
        for (i, w) in self.warnings.iter().enumerate() {
            s.push_str(if i == 0 { "\n    " } else { ",\n    " });
            s.push_str(&json_string(w));
        }
        s.push_str(if self.warnings.is_empty() {
            "]\n"
        } else {
            "\n  ]\n"
        });
        s.push_str("}\n");
        s
    }

    /// The results table only; warnings go to the caller.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        // Writing into a Vec cannot fail.
        w.write_record(&self.results.columns)
            .expect("in-memory csv");
        for row in &self.results.rows {
            w.write_record(row.iter().map(csv_cell))
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

/// Formats `x` with 9 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-3..6).contains(&exp) {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

fn json_cell(c: &Cell) -> String {
    match c {
        Cell::UInt(v) => v.to_string(),
        Cell::Num(v) if v.is_nan() => "null".into(),
        Cell::Num(v) if v.is_infinite() => json_string(&format_number(*v)),
        Cell::Num(v) => format_number(*v),
        Cell::Text(t) => json_string(t),
        Cell::Bool(b) => b.to_string(),
        Cell::Null => "null".into(),
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::UInt(v) => v.to_string(),
        Cell::Num(v) if v.is_nan() => String::new(),
        Cell::Num(v) => format_number(*v),
        Cell::Text(t) => t.clone(),
        Cell::Bool(b) => b.to_string(),
        Cell::Null => String::new(),
    }
}

/// `sha256:<hex>` over the given byte chunks, each length-prefixed.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    format!("sha256:{}", hex::encode(h.finalize()))
}
