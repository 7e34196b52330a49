//! Mixed discrete/continuous tables with explicit missingness, plus the
//! preprocessing steps applied before structure learning.

mod csv_io;
mod impute;
mod normality;
mod transform;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, Node, NodeKind, Nodes};

pub use csv_io::{read_csv, write_csv, ColumnSpec, CsvOptions};
pub use impute::{feature_ranges, heom_distance, knn_impute, ImputationReport, DEFAULT_NEIGHBORS};
pub use normality::{pearson_classes, pearson_normality};
pub use transform::{apply_transform, fit_transform, select_transform, ColumnOptions, Transform, TransformKind, TransformSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("column `{column}` has {found} rows, expected {expected}")]
    LengthMismatch { column: String, expected: usize, found: usize },
    #[error("column `{0}` appears twice")]
    DuplicateColumn(String),
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("column `{column}`: code {code} outside its {levels} levels")]
    CodeOutOfRange { column: String, code: u32, levels: usize },
    #[error("column `{column}`: unknown level `{value}`")]
    UnknownLevel { column: String, value: String },
    #[error("column `{column}`, row {row}: cannot parse `{value}` as a number")]
    Parse { column: String, row: usize, value: String },
    #[error("column `{column}`, row {row}: non-finite value in an observed cell")]
    NonFinite { column: String, row: usize },
    #[error("csv: {0}")]
    Csv(String),
    #[error("column `{column}` has only {available} observed values, {required} needed for imputation")]
    InsufficientDonors { column: String, available: usize, required: usize },
    #[error("rows do not share a schema")]
    SchemaMismatch,
    #[error("sample of size {0} is too small (at least {1} required)")]
    TooFewObservations(usize, usize),
    #[error("sample variance is zero")]
    ZeroVariance,
    #[error("{kind} transform undefined at index {index} (value {value})")]
    Domain { kind: String, index: usize, value: f64 },
    #[error("table has {0} missing cells; run the preprocessing step first")]
    Incomplete(usize),
    #[error("table has no rows")]
    Empty,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Column payload. Missing cells hold `NaN` (continuous) or code 0
/// (discrete) and are flagged in [`Column::missing`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnData {
    Discrete { levels: Vec<String>, codes: Vec<u32> },
    Continuous { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
    pub missing: Vec<bool>,
}

impl Column {
    pub fn continuous(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        let missing = values.iter().map(Option::is_none).collect();
        Column {
            name: name.into(),
            data: ColumnData::Continuous {
                values: values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
            },
            missing,
        }
    }

    /// A complete continuous column.
    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> Self {
        let n = values.len();
        Column {
            name: name.into(),
            data: ColumnData::Continuous { values },
            missing: vec![false; n],
        }
    }

    pub fn discrete(name: impl Into<String>, levels: Vec<String>, codes: Vec<Option<u32>>) -> Self {
        let missing = codes.iter().map(Option::is_none).collect();
        Column {
            name: name.into(),
            data: ColumnData::Discrete {
                levels,
                codes: codes.into_iter().map(|c| c.unwrap_or(0)).collect(),
            },
            missing,
        }
    }

    /// A complete discrete column with levels named `"0"`, `"1"`, ...
    pub fn from_codes(name: impl Into<String>, n_levels: usize, codes: Vec<u32>) -> Self {
        let n = codes.len();
        Column {
            name: name.into(),
            data: ColumnData::Discrete {
                levels: (0..n_levels).map(|l| l.to_string()).collect(),
                codes,
            },
            missing: vec![false; n],
        }
    }

    pub fn kind(&self) -> NodeKind {
        match self.data {
            ColumnData::Discrete { .. } => NodeKind::Discrete,
            ColumnData::Continuous { .. } => NodeKind::Continuous,
        }
    }

    pub fn len(&self) -> usize {
        self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn value(&self, row: usize) -> Value {
        if self.missing[row] {
            return Value::Missing;
        }
        match &self.data {
            ColumnData::Discrete { codes, .. } => Value::Discrete(codes[row]),
            ColumnData::Continuous { values } => Value::Continuous(values[row]),
        }
    }

    /// Observed values of a continuous column; `None` for discrete columns.
    pub fn observed_values(&self) -> Option<Vec<f64>> {
        match &self.data {
            ColumnData::Continuous { values } => Some(
                values
                    .iter()
                    .zip(&self.missing)
                    .filter(|(_, m)| !**m)
                    .map(|(v, _)| *v)
                    .collect(),
            ),
            ColumnData::Discrete { .. } => None,
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        let data = match &self.data {
            ColumnData::Discrete { levels, codes } => ColumnData::Discrete {
                levels: levels.clone(),
                codes: rows.iter().map(|&r| codes[r]).collect(),
            },
            ColumnData::Continuous { values } => ColumnData::Continuous {
                values: rows.iter().map(|&r| values[r]).collect(),
            },
        };
        Column {
            name: self.name.clone(),
            data,
            missing: rows.iter().map(|&r| self.missing[r]).collect(),
        }
    }
}

/// One cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Missing,
    Discrete(u32),
    Continuous(f64),
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Continuous(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_code(&self) -> Option<u32> {
        match *self {
            Value::Discrete(c) => Some(c),
            _ => None,
        }
    }
}

/// Columnar dataset of discrete and continuous variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Column>", into = "Vec<Column>")]
pub struct MixedTable {
    columns: Vec<Column>,
    n_rows: usize,
}

impl TryFrom<Vec<Column>> for MixedTable {
    type Error = DataError;

    fn try_from(columns: Vec<Column>) -> Result<Self, DataError> {
        MixedTable::new(columns)
    }
}

impl From<MixedTable> for Vec<Column> {
    fn from(t: MixedTable) -> Self {
        t.columns
    }
}

impl MixedTable {
    pub fn new(columns: Vec<Column>) -> Result<Self, DataError> {
        let n_rows = columns.first().map_or(0, Column::len);
        let mut seen = std::collections::HashSet::new();
        for col in &columns {
            if !seen.insert(col.name.as_str()) {
                return Err(DataError::DuplicateColumn(col.name.clone()));
            }
            let len = match &col.data {
                ColumnData::Discrete { codes, .. } => codes.len(),
                ColumnData::Continuous { values } => values.len(),
            };
            if len != n_rows || col.missing.len() != n_rows {
                return Err(DataError::LengthMismatch {
                    column: col.name.clone(),
                    expected: n_rows,
                    found: len.max(col.missing.len()),
                });
            }
            match &col.data {
                ColumnData::Discrete { levels, codes } => {
                    for (&c, &m) in codes.iter().zip(&col.missing) {
                        if !m && c as usize >= levels.len() {
                            return Err(DataError::CodeOutOfRange {
                                column: col.name.clone(),
                                code: c,
                                levels: levels.len(),
                            });
                        }
                    }
                }
                ColumnData::Continuous { values } => {
                    for (row, (&v, &m)) in values.iter().zip(&col.missing).enumerate() {
                        if !m && !v.is_finite() {
                            return Err(DataError::NonFinite {
                                column: col.name.clone(),
                                row,
                            });
                        }
                    }
                }
            }
        }
        // Normalise the placeholder stored in missing cells.
        let columns = columns
            .into_iter()
            .map(|mut col| {
                match &mut col.data {
                    ColumnData::Discrete { codes, .. } => {
                        for (c, &m) in codes.iter_mut().zip(&col.missing) {
                            if m {
                                *c = 0;
                            }
                        }
                    }
                    ColumnData::Continuous { values } => {
                        for (v, &m) in values.iter_mut().zip(&col.missing) {
                            if m {
                                *v = f64::NAN;
                            }
                        }
                    }
                }
                col
            })
            .collect();
        Ok(MixedTable { columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn column_index(&self, name: &str) -> Result<usize, DataError> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    }

    pub fn column_by_name(&self, name: &str) -> Result<&Column, DataError> {
        Ok(&self.columns[self.column_index(name)?])
    }

    /// Node list with one node per column, in column order.
    pub fn schema(&self) -> Nodes {
        Nodes::new(self.columns.iter().map(|c| Node::new(c.name.clone(), c.kind())))
            .expect("column names are unique")
    }

    pub fn missing_count(&self) -> usize {
        self.columns.iter().map(Column::missing_count).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.missing_count() == 0
    }

    /// Fails with [`DataError::Incomplete`] when any cell is missing.
    pub fn require_complete(&self) -> Result<(), DataError> {
        match self.missing_count() {
            0 => Ok(()),
            n => Err(DataError::Incomplete(n)),
        }
    }

    pub fn row(&self, r: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.value(r)).collect()
    }

    pub fn value(&self, r: usize, c: usize) -> Value {
        self.columns[c].value(r)
    }

    /// Continuous column values (missing cells are `NaN`).
    pub fn continuous(&self, c: usize) -> Option<&[f64]> {
        match &self.columns[c].data {
            ColumnData::Continuous { values } => Some(values),
            ColumnData::Discrete { .. } => None,
        }
    }

    /// Discrete codes (missing cells are 0).
    pub fn codes(&self, c: usize) -> Option<&[u32]> {
        match &self.columns[c].data {
            ColumnData::Discrete { codes, .. } => Some(codes),
            ColumnData::Continuous { .. } => None,
        }
    }

    pub fn levels(&self, c: usize) -> Option<&[String]> {
        match &self.columns[c].data {
            ColumnData::Discrete { levels, .. } => Some(levels),
            ColumnData::Continuous { .. } => None,
        }
    }

    /// New table with the given rows (repeats allowed), in that order.
    pub fn select_rows(&self, rows: &[usize]) -> MixedTable {
        MixedTable {
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    pub fn replace_column(&mut self, i: usize, col: Column) -> Result<(), DataError> {
        if col.len() != self.n_rows {
            return Err(DataError::LengthMismatch {
                expected: self.n_rows,
                found: col.len(),
                column: col.name,
            });
        }
        let mut cols = self.columns.clone();
        cols[i] = col;
        *self = MixedTable::new(cols)?;
        Ok(())
    }
}
