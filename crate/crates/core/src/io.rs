//! Tuple files: a small TOML document holding the field, the dimension, the
//! optional points and one scalar grid per entry.
//!
//! ```toml
//! field = "rational"
//! dimension = 1
//! points = ["-1", "1"]
//! matrices = [
//!   [["-1"]],
//!   [["-1"]],
//!   [["1"]],
//! ]
//! ```

use std::fmt::Write as _;
use std::path::Path;

use num_rational::BigRational;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{FieldDescriptor, Scalar};
use crate::tuples::MonodromyTuple;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TupleFile {
    field: String,
    dimension: usize,
    #[serde(default)]
    points: Option<Vec<String>>,
    matrices: Vec<Vec<Vec<String>>>,
}

/// Parses a tuple document and validates it as a monodromy tuple.
pub fn parse_tuple(text: &str) -> Result<MonodromyTuple> {
    let file: TupleFile = toml::from_str(text).map_err(|e| Error::Format(e.message().to_string()))?;
    let field: FieldDescriptor = file.field.parse()?;
    let d = file.dimension;
    let mut entries = Vec::with_capacity(file.matrices.len());
    for (k, grid) in file.matrices.iter().enumerate() {
        if grid.len() != d || grid.iter().any(|r| r.len() != d) {
            return Err(Error::Format(format!("matrix {} is not {d}x{d}", k + 1)));
        }
        let mut data = Vec::with_capacity(d * d);
        for (i, row) in grid.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let s = Scalar::parse(cell, field)
                    .map_err(|e| Error::Format(format!("matrix {} entry ({}, {}): {e}", k + 1, i + 1, j + 1)))?;
                data.push(s);
            }
        }
        entries.push(Matrix::new(field, d, d, data)?);
    }
    if entries.is_empty() {
        return Err(Error::Format("a tuple needs at least one matrix".into()));
    }
    let points = match file.points {
        None => None,
        Some(ps) => Some(
            ps.iter()
                .map(|s| s.trim().parse::<BigRational>().map_err(|_| Error::Format(format!("bad point {s:?}"))))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    MonodromyTuple::new(entries, points)
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

/// Canonical text form: one matrix per line, points and scalars as quoted strings.
pub fn write_tuple(t: &MonodromyTuple) -> String {
    let mut out = String::new();
    writeln!(out, "field = {}", quote(&t.field().to_string())).unwrap();
    writeln!(out, "dimension = {}", t.dim()).unwrap();
    if let Some(ps) = t.points() {
        let items: Vec<String> = ps.iter().map(|p| quote(&p.to_string())).collect();
        writeln!(out, "points = [{}]", items.join(", ")).unwrap();
    }
    out.push_str("matrices = [\n");
    for m in t.entries() {
        let rows: Vec<String> = (0..m.rows())
            .map(|i| {
                let cells: Vec<String> = m.row(i).iter().map(|x| quote(&x.to_string())).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        writeln!(out, "  [{}],", rows.join(", ")).unwrap();
    }
    out.push_str("]\n");
    out
}

pub fn load_tuple(path: impl AsRef<Path>) -> Result<MonodromyTuple> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    parse_tuple(&text)
}

pub fn save_tuple(path: impl AsRef<Path>, t: &MonodromyTuple) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_tuple(t)).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}
