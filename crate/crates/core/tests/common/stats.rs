//! Reference computations for scores and imputation, written without
//! reference to the library's implementations.

use nalgebra::{DMatrix, DVector};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn cov(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64
}

/// Solves `m x = b` by Gauss-Jordan elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    (0..n).map(|i| b[i] / m[i][i]).collect()
}

/// Maximised Gaussian log-likelihood of `y` regressed on `xs`, from the
/// residual variance `S_yy - S_yx S_xx^-1 S_xy`.
pub fn regression_loglik(y: &[f64], xs: &[&[f64]]) -> f64 {
    let n = y.len() as f64;
    let sxx: Vec<Vec<f64>> = xs.iter().map(|a| xs.iter().map(|b| cov(a, b)).collect()).collect();
    let sxy: Vec<f64> = xs.iter().map(|a| cov(a, y)).collect();
    let beta = if xs.is_empty() { vec![] } else { solve(sxx, sxy.clone()) };
    let var = cov(y, y) - beta.iter().zip(&sxy).map(|(b, s)| b * s).sum::<f64>();
    -0.5 * n * (LN_2PI + var.ln() + 1.0)
}

/// BIC of an all-continuous linear Gaussian network, computed in one pass
/// over the whole graph.
pub fn gaussian_bic(cols: &[Vec<f64>], edges: &[(usize, usize)]) -> f64 {
    let n = cols[0].len() as f64;
    let mut total = 0.0;
    for v in 0..cols.len() {
        let parents: Vec<&[f64]> = edges.iter().filter(|e| e.1 == v).map(|e| cols[e.0].as_slice()).collect();
        total += regression_loglik(&cols[v], &parents) - 0.5 * (parents.len() + 2) as f64 * n.ln();
    }
    total
}

/// Joint log-density of rows under the multivariate normal implied by a
/// linear Gaussian network: `x = c + B x + e`, `e ~ N(0, diag(d))`.
pub fn mvn_loglik(rows: &[Vec<f64>], c: &[f64], b: &DMatrix<f64>, d: &[f64]) -> f64 {
    let p = c.len();
    let a = (DMatrix::identity(p, p) - b).try_inverse().unwrap();
    let mu = &a * DVector::from_column_slice(c);
    let sigma = &a * DMatrix::from_diagonal(&DVector::from_column_slice(d)) * a.transpose();
    let chol = sigma.cholesky().unwrap();
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    rows.iter()
        .map(|r| {
            let diff = DVector::from_column_slice(r) - &mu;
            let q = diff.dot(&chol.solve(&diff));
            -0.5 * (p as f64 * LN_2PI + log_det + q)
        })
        .sum()
}

/// A cell of a small mixed table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Cat(u32),
    Na,
}

/// Fills holes by sorting every other row on HEOM distance to the hole's
/// row, keeping the `k` nearest plus anything tied with the k-th, and
/// taking the median (numeric) or the lowest most frequent code.
pub fn impute(table: &[Vec<Cell>], numeric: &[bool], k: usize) -> Vec<Vec<Cell>> {
    let n = table.len();
    let p = numeric.len();
    let range: Vec<f64> = (0..p)
        .map(|j| {
            let v: Vec<f64> = table.iter().filter_map(|r| if let Cell::Num(x) = r[j] { Some(x) } else { None }).collect();
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        })
        .collect();
    let dist = |a: &[Cell], b: &[Cell]| -> f64 {
        (0..p)
            .map(|j| match (a[j], b[j]) {
                (Cell::Num(x), Cell::Num(y)) if range[j] > 0.0 => ((x - y).abs() / range[j]).powi(2),
                (Cell::Num(x), Cell::Num(y)) => f64::from(x != y),
                (Cell::Cat(x), Cell::Cat(y)) => f64::from(x != y),
                _ => 1.0,
            })
            .sum::<f64>()
            .sqrt()
    };
    let mut out = table.to_vec();
    for r in 0..n {
        for j in 0..p {
            if table[r][j] != Cell::Na {
                continue;
            }
            let mut cand: Vec<(f64, usize)> =
                (0..n).filter(|&s| s != r && table[s][j] != Cell::Na).map(|s| (dist(&table[r], &table[s]), s)).collect();
            cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let cut = cand[k - 1].0;
            let donors: Vec<Cell> = cand.iter().filter(|c| c.0 <= cut).map(|c| table[c.1][j]).collect();
            out[r][j] = if numeric[j] {
                let mut v: Vec<f64> = donors.iter().map(|c| if let Cell::Num(x) = c { *x } else { unreachable!() }).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let m = v.len();
                Cell::Num(if m % 2 == 1 { v[m / 2] } else { (v[m / 2 - 1] + v[m / 2]) / 2.0 })
            } else {
                let codes: Vec<u32> = donors.iter().map(|c| if let Cell::Cat(x) = c { *x } else { unreachable!() }).collect();
                let best = (0..=*codes.iter().max().unwrap())
                    .max_by_key(|&c| (codes.iter().filter(|&&x| x == c).count(), std::cmp::Reverse(c)))
                    .unwrap();
                Cell::Cat(best)
            }
        }
    }
    out
}
