use std::fmt::Write as _;

use serde_json::Value;

/// A cell of an output table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Flag(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Fixed 17-significant-digit formatting so that repeated runs are byte-identical.
pub fn number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => number(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Flag(v) => v.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

/// CSV with the run configuration as a leading comment line.
pub fn csv(table: &Table, meta: &Value) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", json_compact(meta));
    let _ = writeln!(out, "{}", table.columns.join(","));
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(csv_cell).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

fn write_json(v: &Value, indent: Option<usize>, out: &mut String) {
    let (nl, pad, inner) = match indent {
        Some(d) => ("\n", "  ".repeat(d), Some(d + 1)),
        None => ("", String::new(), None),
    };
    let inner_pad = inner.map_or(String::new(), |d| "  ".repeat(d));
    let sep = if indent.is_some() { ": " } else { ":" };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => out.push_str(&u.to_string()),
            (None, Some(i)) => out.push_str(&i.to_string()),
            _ => out.push_str(&number(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(nl);
                out.push_str(&inner_pad);
                write_json(item, inner, out);
            }
            out.push_str(nl);
            out.push_str(&pad);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(nl);
                out.push_str(&inner_pad);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(sep);
                write_json(item, inner, out);
            }
            out.push_str(nl);
            out.push_str(&pad);
            out.push('}');
        }
    }
}

fn json_compact(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, None, &mut out);
    out
}

/// Pretty JSON with floats in the fixed format.
pub fn json(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, Some(0), &mut out);
    out.push('\n');
    out
}
