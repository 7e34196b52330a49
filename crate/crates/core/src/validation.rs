//! K-fold cross-validated prediction error and score-based model comparison.

use std::cmp::Ordering;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::averaging::{learn_averaged, AveragingConfig, AveragingError};
use crate::data::{Column, ColumnData, DataError, MixedTable, Value};
use crate::graph::{Dag, NodeKind};
use crate::model::{fit_with, FitOptions, ModelError};
use crate::search::{hill_climb, ConstraintSet, SearchConfig, SearchError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("{k} folds requested for {n} rows (need 2 <= k <= n)")]
    Folds { k: usize, n: usize },
    #[error("no continuous nodes to predict")]
    NoContinuousNodes,
    #[error("at least two models are needed for a comparison")]
    TooFewModels,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Averaging(#[from] AveragingError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Partition of `0..n` into `k` shuffled folds whose sizes differ by at
/// most one. Each fold is sorted.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, ValidationError> {
    if k < 2 || k > n {
        return Err(ValidationError::Folds { k, n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = idx[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    /// Z-score continuous columns on the full table before splitting.
    pub standardize: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            seed: 0,
            standardize: false,
        }
    }
}

/// Where each fold's structure comes from.
#[derive(Debug, Clone)]
pub enum CvModel {
    /// Structure given; parameters refit per fold.
    Fixed(Dag),
    /// Structure relearned per fold by hill-climbing, optionally averaged
    /// over bootstrap replicates and oriented into a DAG.
    Learn {
        constraints: ConstraintSet,
        search: SearchConfig,
        averaging: Option<AveragingConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMse {
    pub node: String,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub per_node: Vec<NodeMse>,
    /// Mean of the per-node errors over continuous nodes.
    pub posterior_mse: f64,
    pub folds: usize,
    pub seed: u64,
    pub standardized: bool,
    pub structure: String,
    /// Held-out predictions that used the pooled regression because the
    /// row's discrete configuration was absent from the training folds.
    pub fallback_predictions: usize,
}

fn standardize(t: &MixedTable) -> Result<MixedTable, DataError> {
    let mut out = t.clone();
    for c in 0..t.n_cols() {
        let col = t.column(c);
        let ColumnData::Continuous { values } = &col.data else { continue };
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sd = var.sqrt();
        let scaled = if sd > 0.0 {
            values.iter().map(|v| (v - mean) / sd).collect()
        } else {
            vec![0.0; values.len()]
        };
        out.replace_column(c, Column::from_values(col.name.clone(), scaled))?;
    }
    Ok(out)
}

fn fold_structure(model: &CvModel, train: &MixedTable) -> Result<Dag, ValidationError> {
    match model {
        CvModel::Fixed(dag) => Ok(dag.clone()),
        CvModel::Learn {
            constraints,
            search,
            averaging: None,
        } => Ok(hill_climb(train, constraints, search)?.0),
        CvModel::Learn {
            constraints,
            search,
            averaging: Some(avg),
        } => {
            let (g, _) = learn_averaged(train, constraints, search, avg)?;
            Ok(g.orient().0)
        }
    }
}

/// Cross-validated mean squared error of every continuous node, each
/// predicted from its observed parents on the held-out rows.
pub fn cross_validate(t: &MixedTable, model: &CvModel, cfg: &CvConfig) -> Result<CvReport, ValidationError> {
    t.require_complete()?;
    let table = if cfg.standardize { standardize(t)? } else { t.clone() };
    let targets: Vec<usize> = (0..table.n_cols())
        .filter(|&c| table.column(c).kind() == NodeKind::Continuous)
        .collect();
    if targets.is_empty() {
        return Err(ValidationError::NoContinuousNodes);
    }
    let folds = kfold_split(table.n_rows(), cfg.folds, cfg.seed)?;
    let per_fold: Vec<(Vec<f64>, usize)> = folds
        .par_iter()
        .enumerate()
        .map(|(f, held)| {
            let train_rows: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, rows)| rows.iter().copied())
                .collect();
            let train = table.select_rows(&train_rows);
            let dag = fold_structure(model, &train)?;
            let fitted = fit_with(
                &dag,
                &train,
                FitOptions {
                    allow_sparse: true,
                    ..Default::default()
                },
            )?;
            let mut sse = vec![0.0; targets.len()];
            let mut fallbacks = 0;
            for &r in held {
                let row = table.row(r);
                for (j, &v) in targets.iter().enumerate() {
                    let p = fitted.predict_node(v, &row)?;
                    fallbacks += usize::from(p.fallback);
                    let Value::Continuous(y) = row[v] else { unreachable!("continuous target") };
                    sse[j] += (y - p.value).powi(2);
                }
            }
            Ok((sse, fallbacks))
        })
        .collect::<Result<_, ValidationError>>()?;
    let n = table.n_rows() as f64;
    let mut per_node: Vec<NodeMse> = targets
        .iter()
        .map(|&v| NodeMse {
            node: table.column(v).name.clone(),
            mse: 0.0,
        })
        .collect();
    let mut fallback_predictions = 0;
    for (sse, fb) in &per_fold {
        for (acc, s) in per_node.iter_mut().zip(sse) {
            acc.mse += s;
        }
        fallback_predictions += fb;
    }
    for m in &mut per_node {
        m.mse /= n;
    }
    let posterior_mse = per_node.iter().map(|m| m.mse).sum::<f64>() / per_node.len() as f64;
    let structure = match model {
        CvModel::Fixed(_) => "fixed".to_string(),
        CvModel::Learn { averaging: None, .. } => "relearned per fold".to_string(),
        CvModel::Learn { averaging: Some(_), .. } => "relearned per fold (bootstrap averaged)".to_string(),
    };
    Ok(CvReport {
        per_node,
        posterior_mse,
        folds: cfg.folds,
        seed: cfg.seed,
        standardized: cfg.standardize,
        structure,
        fallback_predictions,
    })
}

/// Scores of one estimated network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub label: String,
    pub bic: f64,
    pub aic: f64,
    #[serde(default)]
    pub posterior_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    #[serde(flatten)]
    pub model: ModelSummary,
    pub rank_bic: usize,
    pub rank_aic: usize,
    pub rank_mse: Option<usize>,
}

/// Models ordered by BIC (larger first), ties broken by AIC then label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

/// Competition ranks ("1224"): 1 is best, equal values share a rank.
fn ranks(values: &[f64], larger_is_better: bool) -> Vec<usize> {
    values
        .iter()
        .map(|&v| {
            1 + values
                .iter()
                .filter(|&&w| if larger_is_better { w > v } else { w < v })
                .count()
        })
        .collect()
}

pub fn compare_models(models: Vec<ModelSummary>) -> Result<Comparison, ValidationError> {
    if models.len() < 2 {
        return Err(ValidationError::TooFewModels);
    }
    let mut models = models;
    models.sort_by(|a, b| {
        b.bic
            .total_cmp(&a.bic)
            .then(b.aic.total_cmp(&a.aic))
            .then_with(|| a.label.cmp(&b.label))
    });
    let bic = ranks(&models.iter().map(|m| m.bic).collect::<Vec<_>>(), true);
    let aic = ranks(&models.iter().map(|m| m.aic).collect::<Vec<_>>(), true);
    let with_mse: Vec<f64> = models.iter().filter_map(|m| m.posterior_mse).collect();
    let rows = models
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            let rank_mse = m
                .posterior_mse
                .map(|v| 1 + with_mse.iter().filter(|&&w| w.partial_cmp(&v) == Some(Ordering::Less)).count());
            ComparisonRow {
                model: m,
                rank_bic: bic[i],
                rank_aic: aic[i],
                rank_mse,
            }
        })
        .collect();
    Ok(Comparison { rows })
}

impl Comparison {
    /// Aligned plain-text table: model, BIC, AIC, posterior MSE, each score
    /// followed by its rank.
    pub fn render(&self) -> String {
        let header = ["Model", "BIC", "AIC", "Posterior MSE"];
        let cells: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.model.label.clone(),
                    format!("{:.2} ({})", r.model.bic, r.rank_bic),
                    format!("{:.2} ({})", r.model.aic, r.rank_aic),
                    match (r.model.posterior_mse, r.rank_mse) {
                        (Some(v), Some(k)) => format!("{v:.3} ({k})"),
                        _ => "-".to_string(),
                    },
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: [&str; 4]| {
            let _ = write!(out, "{:<w$}", row[0], w = widths[0]);
            for (c, w) in row[1..].iter().zip(&widths[1..]) {
                let _ = write!(out, "  {c:>w$}");
            }
            out.push('\n');
        };
        line(&mut out, header);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        line(&mut out, [&rule[0], &rule[1], &rule[2], &rule[3]]);
        for row in &cells {
            line(&mut out, [&row[0], &row[1], &row[2], &row[3]]);
        }
        out
    }
}
