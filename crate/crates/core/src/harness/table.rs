use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::svg::Figure;

/// One CSV cell. Floats are written with `{:?}` so they always carry a `.`,
/// an exponent, or a special name, which keeps them distinct from integers
/// on the way back in.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::Num(v) => Some(v),
            Cell::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn parse(s: &str) -> Cell {
        if let Ok(v) = s.parse::<u64>() {
            return Cell::Int(v);
        }
        if let Ok(v) = s.parse::<f64>() {
            return Cell::Num(v);
        }
        Cell::Text(s.to_string())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Num(v) => write!(f, "{v:?}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
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

/// Named columns of cells plus the figure (if any) drawn from them.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub figure: Option<Figure>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            figure: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows whose text column `key` equals `value`.
    pub fn filter<'a>(&'a self, key: &str, value: &'a str) -> impl Iterator<Item = &'a Vec<Cell>> + 'a {
        let idx = self.column(key);
        self.rows
            .iter()
            .filter(move |r| idx.is_some_and(|i| r[i].as_str() == Some(value)))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(name: &str, text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(Cell::parse).collect()))
            .collect::<std::result::Result<Vec<Vec<Cell>>, _>>()?;
        Ok(Self {
            name: name.to_string(),
            columns,
            rows,
            figure: None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
}

/// Write `<name>.csv` and, when requested and the table has rows and a
/// figure, `<name>.svg` into `dir`. Returns the written paths.
pub fn emit_outputs(table: &ResultTable, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    if table.name.contains(['/', '\\']) || table.name.starts_with('.') {
        return Err(Error::arg(format!("table name {:?} is not a plain file stem", table.name)));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for format in formats {
        match format {
            Format::Csv => {
                let path = dir.join(format!("{}.csv", table.name));
                std::fs::write(&path, table.to_csv()?).map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
            Format::Svg => {
                if let (false, Some(fig)) = (table.rows.is_empty(), &table.figure) {
                    let path = dir.join(format!("{}.svg", table.name));
                    std::fs::write(&path, fig.render()).map_err(|e| Error::io(&path, e))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}
