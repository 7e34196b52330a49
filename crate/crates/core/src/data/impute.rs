use serde::{Deserialize, Serialize};

use super::{Column, ColumnData, DataError, MixedTable, Value};

pub const DEFAULT_NEIGHBORS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub cells_imputed: usize,
    /// `(column, cells imputed)` for every column, in column order.
    pub per_column: Vec<(String, usize)>,
    pub k: usize,
}

/// Observed range of each continuous column; `None` for discrete columns.
pub fn feature_ranges(table: &MixedTable) -> Vec<Option<f64>> {
    table
        .columns()
        .iter()
        .map(|c| {
            c.observed_values().map(|v| {
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if v.is_empty() {
                    0.0
                } else {
                    hi - lo
                }
            })
        })
        .collect()
}

/// Heterogeneous Euclidean-Overlap Metric.
///
/// Each feature contributes 1 when either value is missing, the
/// range-normalised absolute difference for continuous features and the
/// overlap distance (0 equal, 1 different) for discrete ones. A zero-range
/// continuous feature contributes 0 when the values are equal and 1
/// otherwise. Contributions are combined as a Euclidean norm.
pub fn heom_distance(a: &[Value], b: &[Value], ranges: &[Option<f64>]) -> Result<f64, DataError> {
    if a.len() != b.len() || a.len() != ranges.len() {
        return Err(DataError::SchemaMismatch);
    }
    let mut sum = 0.0;
    for ((x, y), range) in a.iter().zip(b).zip(ranges) {
        let d = match (x, y, range) {
            (Value::Missing, _, _) | (_, Value::Missing, _) => 1.0,
            (Value::Continuous(x), Value::Continuous(y), Some(r)) => {
                if *r > 0.0 {
                    (x - y).abs() / r
                } else if x == y {
                    0.0
                } else {
                    1.0
                }
            }
            (Value::Discrete(x), Value::Discrete(y), None) => {
                if x == y {
                    0.0
                } else {
                    1.0
                }
            }
            _ => return Err(DataError::SchemaMismatch),
        };
        sum += d * d;
    }
    Ok(sum.sqrt())
}

/// Median; even-sized samples average the two central values.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Most frequent code; ties go to the lowest code.
fn mode(codes: &[u32]) -> u32 {
    let max = codes.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0usize; max + 1];
    for &c in codes {
        counts[c as usize] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    counts.iter().position(|&c| c == best).unwrap_or(0) as u32
}

/// Fills every missing cell from its `k` nearest rows under the HEOM
/// distance, among rows where that cell is observed. All rows tied with the
/// k-th distance are included. Continuous cells take the donors' median;
/// discrete cells (an extension: the usual use is on continuous indicators)
/// take the donors' mode.
///
/// Distances are always measured on the input table, so the result does
/// not depend on the order in which holes are visited.
pub fn knn_impute(table: &MixedTable, k: usize) -> Result<(MixedTable, ImputationReport), DataError> {
    if k == 0 {
        return Err(DataError::InsufficientDonors {
            column: String::new(),
            available: 0,
            required: 1,
        });
    }
    let n = table.n_rows();
    let ranges = feature_ranges(table);
    let rows: Vec<Vec<Value>> = (0..n).map(|r| table.row(r)).collect();

    for col in table.columns() {
        let missing = col.missing_count();
        if missing > 0 && n - missing < k {
            return Err(DataError::InsufficientDonors {
                column: col.name.clone(),
                available: n - missing,
                required: k,
            });
        }
    }

    let mut distances: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut columns: Vec<Column> = table.columns().to_vec();
    let mut per_column = Vec::with_capacity(columns.len());
    let mut total = 0;

    for (j, col) in columns.iter_mut().enumerate() {
        let holes: Vec<usize> = (0..n).filter(|&r| col.missing[r]).collect();
        per_column.push((col.name.clone(), holes.len()));
        total += holes.len();
        for &r in &holes {
            if distances[r].is_none() {
                let d = (0..n)
                    .map(|s| heom_distance(&rows[r], &rows[s], &ranges))
                    .collect::<Result<Vec<_>, _>>()?;
                distances[r] = Some(d);
            }
            let dist = distances[r].as_ref().expect("computed above");
            let mut donors: Vec<(f64, usize)> = (0..n)
                .filter(|&s| s != r && !table.column(j).missing[s])
                .map(|s| (dist[s], s))
                .collect();
            donors.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let cutoff = donors[k - 1].0;
            let chosen = donors.iter().take_while(|d| d.0 <= cutoff).map(|d| d.1);

            match &mut col.data {
                ColumnData::Continuous { values } => {
                    let orig = table.continuous(j).expect("continuous column");
                    let mut vals: Vec<f64> = chosen.map(|s| orig[s]).collect();
                    values[r] = median(&mut vals);
                }
                ColumnData::Discrete { codes, .. } => {
                    let orig = table.codes(j).expect("discrete column");
                    let vals: Vec<u32> = chosen.map(|s| orig[s]).collect();
                    codes[r] = mode(&vals);
                }
            }
        }
        for &r in &holes {
            col.missing[r] = false;
        }
    }

    Ok((
        MixedTable::new(columns)?,
        ImputationReport {
            cells_imputed: total,
            per_column,
            k,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_rows_have_zero_distance() {
        let a = [Value::Continuous(1.0), Value::Discrete(2)];
        assert_eq!(heom_distance(&a, &a, &[Some(3.0), None]).unwrap(), 0.0);
    }

    #[test]
    fn missing_feature_contributes_one() {
        let a = [Value::Continuous(1.0), Value::Missing];
        let b = [Value::Continuous(1.0), Value::Continuous(5.0)];
        assert_eq!(heom_distance(&a, &b, &[Some(2.0), Some(2.0)]).unwrap(), 1.0);
    }

    #[test]
    fn half_range_differences() {
        let a = [Value::Continuous(0.0), Value::Continuous(10.0)];
        let b = [Value::Continuous(1.0), Value::Continuous(5.0)];
        let d = heom_distance(&a, &b, &[Some(2.0), Some(10.0)]).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let a = [Value::Continuous(0.0)];
        let b = [Value::Discrete(0)];
        assert_eq!(heom_distance(&a, &b, &[Some(1.0)]), Err(DataError::SchemaMismatch));
        assert_eq!(heom_distance(&a, &a, &[]), Err(DataError::SchemaMismatch));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn mode_ties_go_low() {
        assert_eq!(mode(&[2, 1, 2, 1, 3]), 1);
    }

    #[test]
    fn complete_table_unchanged() {
        let t = MixedTable::new(vec![Column::from_values("x", vec![1.0, 2.0, 3.0])]).unwrap();
        let (out, rep) = knn_impute(&t, 10).unwrap();
        assert_eq!(out, t);
        assert_eq!(rep.cells_imputed, 0);
    }

    #[test]
    fn identical_rows_impute_donor_median() {
        let mut x: Vec<Option<f64>> = (0..12).map(|i| Some(i as f64)).collect();
        x[5] = None;
        let t = MixedTable::new(vec![
            Column::continuous("x", x),
            Column::from_values("y", vec![1.0; 12]),
        ])
        .unwrap();
        // All donors are equidistant, so every observed row is included.
        let (out, rep) = knn_impute(&t, 3).unwrap();
        let observed = [0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0];
        assert_eq!(out.continuous(0).unwrap()[5], median(&mut observed.to_vec()));
        assert_eq!(rep.cells_imputed, 1);
        assert_eq!(rep.per_column, vec![("x".to_string(), 1), ("y".to_string(), 0)]);
    }

    #[test]
    fn discrete_hole_takes_mode() {
        let t = MixedTable::new(vec![
            Column::discrete("d", vec!["a".into(), "b".into()], vec![Some(1), Some(1), Some(0), None]),
            Column::from_values("x", vec![0.0, 0.1, 5.0, 0.05]),
        ])
        .unwrap();
        let (out, _) = knn_impute(&t, 2).unwrap();
        assert_eq!(out.codes(0).unwrap()[3], 1);
    }

    #[test]
    fn too_few_donors_names_column() {
        let t = MixedTable::new(vec![Column::continuous("sparse", vec![Some(1.0), None, Some(2.0)])]).unwrap();
        assert_eq!(
            knn_impute(&t, 10).unwrap_err(),
            DataError::InsufficientDonors {
                column: "sparse".into(),
                available: 2,
                required: 10
            }
        );
    }
}
