use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Column, ColumnData, DataError, MixedTable};
use crate::graph::NodeKind;

/// Declares how one CSV column is read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: NodeKind,
    /// Values are percentages in `[0, 100]` (affects the arcsin transform).
    #[serde(default)]
    pub percentage: bool,
    /// Fixed level dictionary for discrete columns. When absent the levels
    /// are the observed values, sorted numerically if they all parse as
    /// numbers and lexicographically otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
    /// Relabelling applied to raw discrete values before level lookup.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub recode: BTreeMap<String, String>,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: NodeKind) -> Self {
        ColumnSpec {
            name: name.into(),
            kind,
            percentage: false,
            levels: None,
            recode: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvOptions {
    /// Field contents treated as missing, compared after trimming.
    pub missing_tokens: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            missing_tokens: vec![String::new()],
        }
    }
}

fn sort_levels(levels: BTreeSet<String>) -> Vec<String> {
    let mut v: Vec<String> = levels.into_iter().collect();
    let numeric: Option<Vec<f64>> = v.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut pairs: Vec<(f64, String)> = nums.into_iter().zip(v).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        v = pairs.into_iter().map(|p| p.1).collect();
    }
    v
}

/// Reads a headed CSV into a [`MixedTable`] with one column per spec, in
/// spec order. CSV columns without a spec are ignored.
pub fn read_csv<R: Read>(reader: R, specs: &[ColumnSpec], opts: &CsvOptions) -> Result<MixedTable, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| DataError::Csv(e.to_string()))?.clone();
    let positions = specs
        .iter()
        .map(|s| {
            headers
                .iter()
                .position(|h| h == s.name)
                .ok_or_else(|| DataError::MissingColumn(s.name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut raw: Vec<Vec<Option<String>>> = vec![Vec::new(); specs.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| DataError::Csv(e.to_string()))?;
        for (j, &p) in positions.iter().enumerate() {
            let field = rec.get(p).unwrap_or("");
            let cell = if opts.missing_tokens.iter().any(|t| t == field) {
                None
            } else {
                Some(field.to_string())
            };
            raw[j].push(cell);
        }
    }

    let mut columns = Vec::with_capacity(specs.len());
    for (spec, cells) in specs.iter().zip(raw) {
        let col = match spec.kind {
            NodeKind::Continuous => {
                let values = cells
                    .into_iter()
                    .enumerate()
                    .map(|(row, c)| match c {
                        None => Ok(None),
                        Some(s) => s.parse::<f64>().map(Some).map_err(|_| DataError::Parse {
                            column: spec.name.clone(),
                            row: row + 1,
                            value: s,
                        }),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Column::continuous(spec.name.clone(), values)
            }
            NodeKind::Discrete => {
                let cells: Vec<Option<String>> = cells
                    .into_iter()
                    .map(|c| c.map(|s| spec.recode.get(&s).cloned().unwrap_or(s)))
                    .collect();
                let levels = match &spec.levels {
                    Some(l) => l.clone(),
                    None => sort_levels(cells.iter().flatten().cloned().collect()),
                };
                let codes = cells
                    .into_iter()
                    .map(|c| match c {
                        None => Ok(None),
                        Some(s) => levels
                            .iter()
                            .position(|l| *l == s)
                            .map(|p| Some(p as u32))
                            .ok_or(DataError::UnknownLevel {
                                column: spec.name.clone(),
                                value: s,
                            }),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Column::discrete(spec.name.clone(), levels, codes)
            }
        };
        columns.push(col);
    }
    MixedTable::new(columns)
}

/// Writes a table as CSV; missing cells become `missing_token`. Floats use
/// the shortest representation that parses back to the same value.
pub fn write_csv<W: Write>(table: &MixedTable, writer: W, missing_token: &str) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| DataError::Csv(e.to_string());
    w.write_record(table.columns().iter().map(|c| c.name.as_str())).map_err(err)?;
    for r in 0..table.n_rows() {
        let rec: Vec<String> = table
            .columns()
            .iter()
            .map(|c| {
                if c.missing[r] {
                    return missing_token.to_string();
                }
                match &c.data {
                    ColumnData::Continuous { values } => format!("{}", values[r]),
                    ColumnData::Discrete { levels, codes } => levels[codes[r] as usize].clone(),
                }
            })
            .collect();
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| DataError::Csv(e.to_string()))?;
    Ok(())
}
