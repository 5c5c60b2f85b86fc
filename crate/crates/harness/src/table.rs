//! Flat result tables and their CSV form.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Cell {
    /// Floats carry 12 significant digits so reruns compare byte for byte.
    pub fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_nan() => "nan".into(),
            Cell::Float(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Float(x) => format!("{x:.11e}"),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Str(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Float(x.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Table) {
        assert_eq!(self.columns, other.columns, "schema mismatch for table {}", self.name);
        self.rows.extend(other.rows);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Report(e.to_string()))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.to_csv()?).map_err(|e| HarnessError::io(&path, e))
    }
}

/// A CSV read back as strings, with typed column access.
#[derive(Debug, Clone)]
pub struct CsvData {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    index: HashMap<String, usize>,
}

impl CsvData {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        let index = columns.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(CsvData { columns, rows, index })
    }

    /// Concatenates files with identical headers.
    pub fn read_all(paths: &[std::path::PathBuf]) -> Result<Self> {
        let mut it = paths.iter();
        let first = it
            .next()
            .ok_or_else(|| HarnessError::Report("no input files".into()))?;
        let mut data = Self::read(first)?;
        for p in it {
            let next = Self::read(p)?;
            if next.columns != data.columns {
                return Err(HarnessError::Report(format!("{} has a different header", p.display())));
            }
            data.rows.extend(next.rows);
        }
        Ok(data)
    }

    pub fn col(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| HarnessError::Report(format!("missing column '{name}'")))
    }

    pub fn str(&self, row: usize, name: &str) -> Result<&str> {
        Ok(&self.rows[row][self.col(name)?])
    }

    pub fn f64(&self, row: usize, name: &str) -> Result<f64> {
        let s = self.str(row, name)?;
        s.parse::<f64>()
            .map_err(|_| HarnessError::Report(format!("column '{name}' row {row}: '{s}' is not a number")))
    }

    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        (0..self.rows.len()).map(|r| self.f64(r, name)).collect()
    }

    /// Row indices where `column == value`.
    pub fn filter(&self, name: &str, value: &str) -> Result<Vec<usize>> {
        let c = self.col(name)?;
        Ok((0..self.rows.len()).filter(|&r| self.rows[r][c] == value).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
