use std::fmt;

/// A single table value.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Float(v) => Some(v),
            Cell::Int(v) => Some(v as f64),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            Cell::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Cell::Bool(b) => Some(b),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

/// Which receive-SNR definition a table's `snr_db` values use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrConvention {
    /// `SNR = N / sigma_n^2`, the per-antenna SNR of a normalized channel.
    PerAntenna,
    /// `SNR = 1 / sigma_n^2`.
    InverseNoise,
    NotApplicable,
}

impl SnrConvention {
    pub fn label(&self) -> &'static str {
        match self {
            SnrConvention::PerAntenna => "N/sigma_n^2",
            SnrConvention::InverseNoise => "1/sigma_n^2",
            SnrConvention::NotApplicable => "none",
        }
    }
}

impl fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub master_seed: u64,
    pub trials: usize,
    pub cells: Vec<Cell>,
}

/// Tagged experiment output: named columns and rows of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub experiment: String,
    pub snr_convention: SnrConvention,
    pub master_seed: u64,
    pub trials: usize,
    /// Run parameters that are not per-row inputs (e.g. a sigma_min floor).
    pub parameters: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn new(
        experiment: &str,
        snr_convention: SnrConvention,
        master_seed: u64,
        trials: usize,
        columns: &[&str],
    ) -> Self {
        Self {
            experiment: experiment.to_owned(),
            snr_convention,
            master_seed,
            trials,
            parameters: Vec::new(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_parameter(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width must match the header");
        self.rows.push(Row {
            master_seed: self.master_seed,
            trials: self.trials,
            cells,
        });
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn rows(&self) -> impl Iterator<Item = RowView<'_>> {
        self.rows.iter().map(move |row| RowView { table: self, row })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Named access into one row.
#[derive(Clone, Copy)]
pub struct RowView<'a> {
    table: &'a ResultTable,
    row: &'a Row,
}

impl<'a> RowView<'a> {
    pub fn get(&self, column: &str) -> Option<&'a Cell> {
        self.table.column_index(column).map(|i| &self.row.cells[i])
    }

    pub fn f64(&self, column: &str) -> f64 {
        self.get(column)
            .and_then(Cell::as_f64)
            .unwrap_or_else(|| panic!("column {column} is not numeric"))
    }

    pub fn int(&self, column: &str) -> i64 {
        self.get(column)
            .and_then(Cell::as_i64)
            .unwrap_or_else(|| panic!("column {column} is not an integer"))
    }

    pub fn text(&self, column: &str) -> &'a str {
        self.get(column)
            .and_then(Cell::as_str)
            .unwrap_or_else(|| panic!("column {column} is not text"))
    }

    pub fn row(&self) -> &'a Row {
        self.row
    }
}
