//! Tables, manifests and the writers that put them on disk.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::paths::{io, WeightedPathEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) if *x != 0.0 && (x.abs() < 1e-5 || x.abs() >= 1e16) => format!("{x:e}"),
            Cell::F(x) => x.to_string(),
            Cell::I(x) => x.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // NaN and infinities have no JSON form
            Cell::F(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::I(x) => json!(x),
            Cell::S(s) => json!(s),
            Cell::B(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::B(b)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::S(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rows as objects; keys sort alphabetically.
    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().map(Cell::json)).collect::<Map<_, _>>()))
                .collect(),
        )
    }
}

/// What a command produces.
#[derive(Debug, Clone)]
pub enum Artifact {
    Table(Table),
    /// A path ensemble in the path CSV format, or the binary format when `binary` is set.
    Ensemble { ensemble: WeightedPathEnsemble, binary: bool },
}

impl Artifact {
    pub fn ensemble_table(ensemble: &WeightedPathEnsemble) -> Table {
        let mut t = Table::new(&["path_id", "time", "x", "y", "weight"]);
        for (i, (p, w)) in ensemble.paths().iter().zip(ensemble.weights()).enumerate() {
            for (k, z) in p.positions().iter().enumerate() {
                t.push(vec![i.into(), (p.start_time() + k as i64).into(), (z[0] as i64).into(), (z[1] as i64).into(), (*w).into()]);
            }
        }
        t
    }

    /// Writes the artifact body. JSON bodies embed the manifest.
    pub fn write<W: Write>(&self, format: Format, manifest: &Value, mut out: W) -> Result<()> {
        match (self, format) {
            (Artifact::Ensemble { ensemble, binary: true }, _) => io::write_binary(ensemble, out),
            (Artifact::Ensemble { ensemble, .. }, Format::Csv) => io::write_csv(ensemble, out),
            (Artifact::Table(t), Format::Csv) => t.write_csv(out),
            (a, Format::Json) => {
                let rows = match a {
                    Artifact::Table(t) => t.json_rows(),
                    Artifact::Ensemble { ensemble, .. } => Self::ensemble_table(ensemble).json_rows(),
                };
                serde_json::to_writer_pretty(&mut out, &json!({ "manifest": manifest, "rows": rows }))?;
                writeln!(out)?;
                Ok(())
            }
        }
    }
}
