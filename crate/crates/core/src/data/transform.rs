use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{pearson_normality, DataError};

/// Candidate normalising transforms, before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    None,
    Log,
    Arcsin,
    Arcsinh,
    Sqrt,
    BoxCox,
    YeoJohnson,
    OrderedQuantile,
}

impl TransformKind {
    pub const ALL: [TransformKind; 8] = [
        TransformKind::None,
        TransformKind::Log,
        TransformKind::Arcsin,
        TransformKind::Arcsinh,
        TransformKind::Sqrt,
        TransformKind::BoxCox,
        TransformKind::YeoJohnson,
        TransformKind::OrderedQuantile,
    ];
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TransformKind::None => "none",
            TransformKind::Log => "log",
            TransformKind::Arcsin => "arcsin",
            TransformKind::Arcsinh => "arcsinh",
            TransformKind::Sqrt => "sqrt",
            TransformKind::BoxCox => "box_cox",
            TransformKind::YeoJohnson => "yeo_johnson",
            TransformKind::OrderedQuantile => "ordered_quantile",
        };
        f.write_str(s)
    }
}

/// A fitted transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    None,
    Log,
    /// `asin(sqrt(x / 100))` for percentages, `asin(sqrt(x))` otherwise.
    Arcsin { percentage: bool },
    Arcsinh,
    Sqrt,
    BoxCox { lambda: f64 },
    YeoJohnson { lambda: f64 },
    /// Sorted distinct training values and their normal scores.
    OrderedQuantile { x: Vec<f64>, z: Vec<f64> },
}

impl Transform {
    pub fn kind(&self) -> TransformKind {
        match self {
            Transform::None => TransformKind::None,
            Transform::Log => TransformKind::Log,
            Transform::Arcsin { .. } => TransformKind::Arcsin,
            Transform::Arcsinh => TransformKind::Arcsinh,
            Transform::Sqrt => TransformKind::Sqrt,
            Transform::BoxCox { .. } => TransformKind::BoxCox,
            Transform::YeoJohnson { .. } => TransformKind::YeoJohnson,
            Transform::OrderedQuantile { .. } => TransformKind::OrderedQuantile,
        }
    }
}

/// Transform chosen for one column, with its normality statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub column: String,
    pub transform: Transform,
    pub normality: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnOptions {
    pub percentage: bool,
}

const LAMBDA_RANGE: (f64, f64) = (-5.0, 5.0);
const LAMBDA_TOL: f64 = 1e-4;
const LAMBDA_ZERO: f64 = 1e-10;

fn box_cox(x: f64, lambda: f64) -> f64 {
    if lambda.abs() < LAMBDA_ZERO {
        x.ln()
    } else {
        (x.powf(lambda) - 1.0) / lambda
    }
}

fn yeo_johnson(x: f64, lambda: f64) -> f64 {
    if x >= 0.0 {
        if lambda.abs() < LAMBDA_ZERO {
            x.ln_1p()
        } else {
            ((x + 1.0).powf(lambda) - 1.0) / lambda
        }
    } else if (lambda - 2.0).abs() < LAMBDA_ZERO {
        -(-x).ln_1p()
    } else {
        -((1.0 - x).powf(2.0 - lambda) - 1.0) / (2.0 - lambda)
    }
}

fn population_variance(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let m = y.iter().sum::<f64>() / n;
    y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
}

/// Gaussian profile log-likelihood of the transformed sample plus the
/// log-Jacobian of the transform.
fn profile_loglik(x: &[f64], lambda: f64, f: fn(f64, f64) -> f64, log_jacobian: f64) -> f64 {
    let y: Vec<f64> = x.iter().map(|&v| f(v, lambda)).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let var = population_variance(&y);
    if !var.is_finite() || var <= 0.0 {
        return f64::NEG_INFINITY;
    }
    -0.5 * x.len() as f64 * var.ln() + (lambda - 1.0) * log_jacobian
}

/// Golden-section maximisation on a bracket.
fn golden_max(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}

fn fit_lambda(x: &[f64], f: fn(f64, f64) -> f64, log_jacobian: f64) -> f64 {
    golden_max(LAMBDA_RANGE.0, LAMBDA_RANGE.1, LAMBDA_TOL, |l| profile_loglik(x, l, f, log_jacobian))
}

fn domain_check(kind: TransformKind, x: &[f64], ok: impl Fn(f64) -> bool) -> Result<(), DataError> {
    match x.iter().position(|&v| !ok(v)) {
        Some(index) => Err(DataError::Domain {
            kind: kind.to_string(),
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

fn ordered_quantile(x: &[f64]) -> Transform {
    let n = x.len();
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        // Tied values share the average of their 1-based ranks.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        xs.push(sorted[i]);
        zs.push(normal.inverse_cdf((rank - 0.5) / n as f64));
        i = j + 1;
    }
    Transform::OrderedQuantile { x: xs, z: zs }
}

fn interpolate(xs: &[f64], zs: &[f64], v: f64) -> f64 {
    let m = xs.len();
    if m == 1 {
        return zs[0];
    }
    let seg = match xs.binary_search_by(|p| p.total_cmp(&v)) {
        Ok(i) => return zs[i],
        Err(0) => 0,
        Err(i) if i >= m => m - 2,
        Err(i) => i - 1,
    };
    // Interior points interpolate; points outside extend the end segment.
    let t = (v - xs[seg]) / (xs[seg + 1] - xs[seg]);
    zs[seg] + t * (zs[seg + 1] - zs[seg])
}

/// Fits a transform of the given kind to a column. Fails with
/// [`DataError::Domain`] when the data fall outside the transform's domain.
pub fn fit_transform(kind: TransformKind, x: &[f64], opts: ColumnOptions) -> Result<Transform, DataError> {
    if x.is_empty() {
        return Err(DataError::Empty);
    }
    Ok(match kind {
        TransformKind::None => Transform::None,
        TransformKind::Log => {
            domain_check(kind, x, |v| v > 0.0)?;
            Transform::Log
        }
        TransformKind::Sqrt => {
            domain_check(kind, x, |v| v >= 0.0)?;
            Transform::Sqrt
        }
        TransformKind::Arcsin => {
            let upper = if opts.percentage { 100.0 } else { 1.0 };
            domain_check(kind, x, |v| (0.0..=upper).contains(&v))?;
            Transform::Arcsin {
                percentage: opts.percentage,
            }
        }
        TransformKind::Arcsinh => Transform::Arcsinh,
        TransformKind::BoxCox => {
            domain_check(kind, x, |v| v > 0.0)?;
            let jac: f64 = x.iter().map(|v| v.ln()).sum();
            Transform::BoxCox {
                lambda: fit_lambda(x, box_cox, jac),
            }
        }
        TransformKind::YeoJohnson => {
            let jac: f64 = x.iter().map(|v| v.signum() * v.abs().ln_1p()).sum();
            Transform::YeoJohnson {
                lambda: fit_lambda(x, yeo_johnson, jac),
            }
        }
        TransformKind::OrderedQuantile => ordered_quantile(x),
    })
}

/// Applies a fitted transform elementwise. Ordered-quantile transforms
/// interpolate the stored training mapping, extrapolating linearly from the
/// outermost segments.
pub fn apply_transform(t: &Transform, x: &[f64]) -> Result<Vec<f64>, DataError> {
    let kind = t.kind();
    Ok(match t {
        Transform::None => x.to_vec(),
        Transform::Log => {
            domain_check(kind, x, |v| v > 0.0)?;
            x.iter().map(|v| v.ln()).collect()
        }
        Transform::Sqrt => {
            domain_check(kind, x, |v| v >= 0.0)?;
            x.iter().map(|v| v.sqrt()).collect()
        }
        Transform::Arcsin { percentage } => {
            let upper = if *percentage { 100.0 } else { 1.0 };
            domain_check(kind, x, |v| (0.0..=upper).contains(&v))?;
            x.iter().map(|v| (v / upper).sqrt().asin()).collect()
        }
        Transform::Arcsinh => x.iter().map(|v| v.asinh()).collect(),
        Transform::BoxCox { lambda } => {
            domain_check(kind, x, |v| v > 0.0)?;
            x.iter().map(|&v| box_cox(v, *lambda)).collect()
        }
        Transform::YeoJohnson { lambda } => x.iter().map(|&v| yeo_johnson(v, *lambda)).collect(),
        Transform::OrderedQuantile { x: xs, z } => x.iter().map(|&v| interpolate(xs, z, v)).collect(),
    })
}

/// Fits every applicable candidate and keeps the one with the smallest
/// Pearson statistic. `None` is always evaluated first and wins ties;
/// remaining ties go to the earlier candidate. Inapplicable candidates are
/// skipped.
pub fn select_transform(
    column: &str,
    x: &[f64],
    candidates: &[TransformKind],
    opts: ColumnOptions,
) -> Result<TransformSpec, DataError> {
    let mut best = TransformSpec {
        column: column.to_string(),
        transform: Transform::None,
        normality: pearson_normality(x)?,
    };
    for &kind in candidates.iter().filter(|&&k| k != TransformKind::None) {
        let Ok(t) = fit_transform(kind, x, opts) else {
            continue;
        };
        let Ok(stat) = apply_transform(&t, x).and_then(|y| pearson_normality(&y)) else {
            continue;
        };
        if stat < best.normality {
            best = TransformSpec {
                column: column.to_string(),
                transform: t,
                normality: stat,
            };
        }
    }
    Ok(best)
}
