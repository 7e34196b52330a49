use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{clgbn_violation, ModelError, Score, VARIANCE_FLOOR};
use crate::data::{MixedTable, Value};
use crate::graph::{Dag, Node, NodeKind};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Pseudo-count added to every CPT cell. Off (pure maximum likelihood)
    /// by default.
    pub laplace: Option<f64>,
    /// Leave under-populated parent configurations unfitted instead of
    /// failing. Prediction then falls back to the pooled regression.
    pub allow_sparse: bool,
}

/// A linear Gaussian: `mean = intercept + coefficients · x`, MLE variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub variance: f64,
    pub n: usize,
    /// The design was rank deficient and the least-norm solution was used.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub collinear: bool,
}

impl Regression {
    pub fn mean(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    pub fn log_density(&self, y: f64, x: &[f64]) -> f64 {
        let r = y - self.mean(x);
        -0.5 * (LN_2PI + self.variance.ln() + r * r / self.variance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDiscrete {
    pub node: String,
    pub levels: Vec<String>,
    pub parents: Vec<String>,
    pub parent_cards: Vec<usize>,
    /// One probability vector per parent configuration (first parent varies
    /// slowest); `None` for unfitted sparse configurations.
    pub cpt: Vec<Option<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalGaussian {
    pub node: String,
    pub discrete_parents: Vec<String>,
    pub discrete_cards: Vec<usize>,
    pub continuous_parents: Vec<String>,
    /// One regression per discrete-parent configuration.
    pub regressions: Vec<Option<Regression>>,
    /// Regression pooled over all configurations, kept for sparse fits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<Regression>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Local {
    Discrete(LocalDiscrete),
    Gaussian(LocalGaussian),
}

/// A local distribution with its training log-likelihood and parameter count.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub local: Local,
    pub loglik: f64,
    pub n_params: usize,
}

/// Configuration index of every row, first parent varying slowest.
fn config_indices(table: &MixedTable, parents: &[usize], cards: &[usize]) -> Vec<usize> {
    let mut idx = vec![0usize; table.n_rows()];
    for (&p, &card) in parents.iter().zip(cards) {
        let codes = table.codes(p).expect("discrete parent");
        for (i, &c) in idx.iter_mut().zip(codes) {
            *i = *i * card + c as usize;
        }
    }
    idx
}

pub(crate) fn config_label(table_levels: &[&[String]], names: &[String], mut config: usize) -> String {
    if names.is_empty() {
        return "(none)".to_string();
    }
    let mut parts = vec![String::new(); names.len()];
    for i in (0..names.len()).rev() {
        let card = table_levels[i].len();
        parts[i] = format!("{}={}", names[i], table_levels[i][config % card]);
        config /= card;
    }
    parts.join(",")
}

/// Ordinary least squares of `y` on `xs` over `rows`, solved on centred
/// data with an SVD so that rank-deficient designs get the least-norm
/// solution.
fn ols(y: &[f64], xs: &[&[f64]], rows: &[usize]) -> (Regression, f64) {
    let n = rows.len();
    let nf = n as f64;
    let p = xs.len();
    let y_mean = rows.iter().map(|&r| y[r]).sum::<f64>() / nf;
    let x_mean: Vec<f64> = xs.iter().map(|x| rows.iter().map(|&r| x[r]).sum::<f64>() / nf).collect();

    let mut coefficients = vec![0.0; p];
    let mut collinear = false;
    if p > 0 {
        let mut gram = DMatrix::<f64>::zeros(p, p);
        let mut cross = DVector::<f64>::zeros(p);
        for &r in rows {
            let dy = y[r] - y_mean;
            for i in 0..p {
                let di = xs[i][r] - x_mean[i];
                cross[i] += di * dy;
                for j in 0..=i {
                    gram[(i, j)] += di * (xs[j][r] - x_mean[j]);
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                gram[(j, i)] = gram[(i, j)];
            }
        }
        let svd = gram.svd(true, true);
        let max_sv = svd.singular_values.max();
        let eps = (max_sv * 1e-10).max(f64::MIN_POSITIVE);
        collinear = svd.singular_values.iter().any(|&s| s <= eps);
        if max_sv > 0.0 {
            let beta = svd.solve(&cross, eps).expect("SVD computed with U and V");
            coefficients = beta.iter().copied().collect();
        }
    }
    let intercept = y_mean - coefficients.iter().zip(&x_mean).map(|(b, m)| b * m).sum::<f64>();
    let rss: f64 = rows
        .iter()
        .map(|&r| {
            let fitted = intercept + coefficients.iter().zip(xs).map(|(b, x)| b * x[r]).sum::<f64>();
            (y[r] - fitted).powi(2)
        })
        .sum();
    let variance = (rss / nf).max(VARIANCE_FLOOR);
    let loglik = -0.5 * (nf * (LN_2PI + variance.ln()) + rss / variance);
    (
        Regression {
            intercept,
            coefficients,
            variance,
            n,
            collinear,
        },
        loglik,
    )
}

/// Fits the local distribution of `node` given `parents` on a complete
/// table whose columns are the graph's nodes.
pub fn local_fit(table: &MixedTable, node: usize, parents: &[usize], opts: FitOptions) -> Result<LocalResult, ModelError> {
    let name = table.column(node).name.clone();
    let (disc, cont): (Vec<usize>, Vec<usize>) = parents
        .iter()
        .partition(|&&p| table.column(p).kind() == NodeKind::Discrete);
    let disc_names: Vec<String> = disc.iter().map(|&p| table.column(p).name.clone()).collect();
    let disc_levels: Vec<&[String]> = disc.iter().map(|&p| table.levels(p).expect("discrete")).collect();
    let cards: Vec<usize> = disc_levels.iter().map(|l| l.len()).collect();
    let n_configs: usize = cards.iter().product();
    let configs = config_indices(table, &disc, &cards);

    match table.column(node).kind() {
        NodeKind::Discrete => {
            if let Some(&c) = cont.first() {
                return Err(ModelError::ContinuousParentOfDiscrete {
                    from: table.column(c).name.clone(),
                    to: name,
                });
            }
            let levels = table.levels(node).expect("discrete").to_vec();
            let card = levels.len();
            let codes = table.codes(node).expect("discrete");
            let mut counts = vec![vec![0usize; card]; n_configs];
            for (&cfg, &c) in configs.iter().zip(codes) {
                counts[cfg][c as usize] += 1;
            }
            let mut cpt = Vec::with_capacity(n_configs);
            let mut loglik = 0.0;
            for (cfg, row) in counts.iter().enumerate() {
                let total: usize = row.iter().sum();
                let probs = match opts.laplace {
                    Some(alpha) if alpha > 0.0 => {
                        let denom = total as f64 + alpha * card as f64;
                        Some(row.iter().map(|&k| (k as f64 + alpha) / denom).collect::<Vec<_>>())
                    }
                    _ if total == 0 => {
                        if opts.allow_sparse {
                            None
                        } else {
                            return Err(ModelError::EmptyConfiguration {
                                node: name,
                                config: config_label(&disc_levels, &disc_names, cfg),
                            });
                        }
                    }
                    _ => Some(row.iter().map(|&k| k as f64 / total as f64).collect()),
                };
                if let Some(p) = &probs {
                    loglik += row
                        .iter()
                        .zip(p)
                        .filter(|(&k, _)| k > 0)
                        .map(|(&k, &q)| k as f64 * q.ln())
                        .sum::<f64>();
                }
                cpt.push(probs);
            }
            Ok(LocalResult {
                local: Local::Discrete(LocalDiscrete {
                    node: name,
                    levels,
                    parents: disc_names,
                    parent_cards: cards,
                    cpt,
                }),
                loglik,
                n_params: n_configs * (card - 1),
            })
        }
        NodeKind::Continuous => {
            let y = table.continuous(node).expect("continuous");
            let xs: Vec<&[f64]> = cont.iter().map(|&p| table.continuous(p).expect("continuous")).collect();
            let required = cont.len() + 2;
            let mut buckets = vec![Vec::new(); n_configs];
            for (r, &cfg) in configs.iter().enumerate() {
                buckets[cfg].push(r);
            }
            let mut regressions = Vec::with_capacity(n_configs);
            let mut loglik = 0.0;
            for (cfg, rows) in buckets.iter().enumerate() {
                if rows.len() < required {
                    if opts.allow_sparse {
                        regressions.push(None);
                        continue;
                    }
                    return Err(ModelError::InsufficientRows {
                        node: name,
                        config: config_label(&disc_levels, &disc_names, cfg),
                        rows: rows.len(),
                        required,
                    });
                }
                let (reg, ll) = ols(y, &xs, rows);
                if reg.collinear {
                    log::warn!(
                        "node `{}`, configuration {}: collinear regressors, using least-norm solution",
                        name,
                        config_label(&disc_levels, &disc_names, cfg)
                    );
                }
                loglik += ll;
                regressions.push(Some(reg));
            }
            let fallback = if opts.allow_sparse {
                let all: Vec<usize> = (0..table.n_rows()).collect();
                if all.len() >= required {
                    Some(ols(y, &xs, &all).0)
                } else {
                    Some(ols(y, &[], &all).0)
                }
            } else {
                None
            };
            Ok(LocalResult {
                local: Local::Gaussian(LocalGaussian {
                    node: name,
                    discrete_parents: disc_names,
                    discrete_cards: cards,
                    continuous_parents: cont.iter().map(|&p| table.column(p).name.clone()).collect(),
                    regressions,
                    fallback,
                }),
                loglik,
                n_params: n_configs * (cont.len() + 2),
            })
        }
    }
}

/// A fitted network: structure, local distributions, training
/// log-likelihood and parameter counts, all per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ClgbnFit {
    pub(super) dag: Dag,
    pub(super) locals: Vec<Local>,
    pub(super) node_loglik: Vec<f64>,
    pub(super) node_params: Vec<usize>,
    pub(super) n_obs: usize,
}

/// JSON form of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub nodes: Vec<Node>,
    pub edges: Vec<(String, String)>,
    pub locals: Vec<Local>,
    pub loglik: f64,
    pub n_params: usize,
    pub n_obs: usize,
    pub bic: f64,
    pub aic: f64,
}

fn check_schema(dag: &Dag, table: &MixedTable) -> Result<(), ModelError> {
    if dag.len() != table.n_cols() {
        return Err(ModelError::SchemaMismatch(format!(
            "{} nodes, {} columns",
            dag.len(),
            table.n_cols()
        )));
    }
    for (i, node) in dag.nodes().iter().enumerate() {
        let col = table.column(i);
        if col.name != node.name || col.kind() != node.kind {
            return Err(ModelError::SchemaMismatch(format!(
                "node {} is `{}` ({}), column {} is `{}` ({})",
                i,
                node.name,
                node.kind,
                i,
                col.name,
                col.kind()
            )));
        }
    }
    Ok(())
}

pub fn fit(dag: &Dag, table: &MixedTable) -> Result<ClgbnFit, ModelError> {
    fit_with(dag, table, FitOptions::default())
}

/// Maximum-likelihood fit of every local distribution. The table must be
/// complete and its columns must be the graph's nodes, in order.
pub fn fit_with(dag: &Dag, table: &MixedTable, opts: FitOptions) -> Result<ClgbnFit, ModelError> {
    check_schema(dag, table)?;
    table.require_complete()?;
    if table.n_rows() == 0 {
        return Err(ModelError::NoObservations);
    }
    if let Some((a, b)) = clgbn_violation(dag) {
        return Err(ModelError::ContinuousParentOfDiscrete {
            from: dag.name(a).to_string(),
            to: dag.name(b).to_string(),
        });
    }
    let mut locals = Vec::with_capacity(dag.len());
    let mut node_loglik = Vec::with_capacity(dag.len());
    let mut node_params = Vec::with_capacity(dag.len());
    for v in 0..dag.len() {
        let parents: Vec<usize> = dag.parents(v).iter().copied().collect();
        let r = local_fit(table, v, &parents, opts)?;
        locals.push(r.local);
        node_loglik.push(r.loglik);
        node_params.push(r.n_params);
    }
    Ok(ClgbnFit {
        dag: dag.clone(),
        locals,
        node_loglik,
        node_params,
        n_obs: table.n_rows(),
    })
}

impl ClgbnFit {
    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn locals(&self) -> &[Local] {
        &self.locals
    }

    pub fn local(&self, v: usize) -> &Local {
        &self.locals[v]
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn loglik(&self) -> f64 {
        self.node_loglik.iter().sum()
    }

    pub fn node_loglik(&self, v: usize) -> f64 {
        self.node_loglik[v]
    }

    pub fn n_params(&self) -> usize {
        self.node_params.iter().sum()
    }

    pub fn node_params(&self, v: usize) -> usize {
        self.node_params[v]
    }

    pub fn score(&self, score: Score) -> f64 {
        self.loglik() - score.penalty(self.n_params(), self.n_obs)
    }

    /// `loglik - (k/2) ln n`.
    pub fn bic(&self) -> f64 {
        self.score(Score::Bic)
    }

    /// `loglik - k`.
    pub fn aic(&self) -> f64 {
        self.score(Score::Aic)
    }

    /// The node's own term of the decomposed score.
    pub fn local_score(&self, v: usize, score: Score) -> f64 {
        score.local(self.node_loglik[v], self.node_params[v], self.n_obs)
    }

    /// Sum over rows of the log joint density (mass for discrete nodes)
    /// under the factorization. Discrete levels are matched by name.
    pub fn log_likelihood(&self, table: &MixedTable) -> Result<f64, ModelError> {
        check_schema(&self.dag, table)?;
        table.require_complete()?;
        // table code -> fitted code, per discrete column
        let mut remap: Vec<Vec<u32>> = vec![Vec::new(); self.dag.len()];
        for (v, local) in self.locals.iter().enumerate() {
            if let Local::Discrete(d) = local {
                remap[v] = table
                    .levels(v)
                    .expect("schema checked")
                    .iter()
                    .map(|l| {
                        d.levels.iter().position(|x| x == l).map(|p| p as u32).ok_or_else(|| {
                            ModelError::UnknownLevel {
                                node: d.node.clone(),
                                level: l.clone(),
                            }
                        })
                    })
                    .collect::<Result<_, _>>()?;
            }
        }
        let mut total = 0.0;
        let mut row: Vec<Value> = Vec::with_capacity(self.dag.len());
        for r in 0..table.n_rows() {
            row.clear();
            row.extend((0..self.dag.len()).map(|v| match table.value(r, v) {
                Value::Discrete(c) => Value::Discrete(remap[v][c as usize]),
                other => other,
            }));
            for v in 0..self.dag.len() {
                total += self.local_log_density(v, &row)?;
            }
        }
        Ok(total)
    }

    pub(crate) fn config_of(&self, v: usize, row: &[Value]) -> Result<usize, ModelError> {
        let mut cfg = 0usize;
        for &p in self.dag.parents(v) {
            if self.dag.kind(p) != NodeKind::Discrete {
                continue;
            }
            let card = match &self.locals[p] {
                Local::Discrete(d) => d.levels.len(),
                Local::Gaussian(_) => unreachable!("discrete node has a discrete local"),
            };
            let code = row[p].as_code().ok_or_else(|| ModelError::MissingParent {
                node: self.dag.name(v).to_string(),
                parent: self.dag.name(p).to_string(),
            })?;
            cfg = cfg * card + code as usize;
        }
        Ok(cfg)
    }

    pub(crate) fn continuous_parent_values(&self, v: usize, row: &[Value]) -> Result<Vec<f64>, ModelError> {
        self.dag
            .parents(v)
            .iter()
            .filter(|&&p| self.dag.kind(p) == NodeKind::Continuous)
            .map(|&p| {
                row[p].as_f64().ok_or_else(|| ModelError::MissingParent {
                    node: self.dag.name(v).to_string(),
                    parent: self.dag.name(p).to_string(),
                })
            })
            .collect()
    }

    fn unfitted(&self, v: usize, cfg: usize) -> ModelError {
        ModelError::EmptyConfiguration {
            node: self.dag.name(v).to_string(),
            config: format!("#{cfg}"),
        }
    }

    fn local_log_density(&self, v: usize, row: &[Value]) -> Result<f64, ModelError> {
        let cfg = self.config_of(v, row)?;
        match &self.locals[v] {
            Local::Discrete(d) => {
                let probs = d.cpt[cfg].as_ref().ok_or_else(|| self.unfitted(v, cfg))?;
                let code = row[v].as_code().expect("discrete value");
                Ok(probs[code as usize].ln())
            }
            Local::Gaussian(g) => {
                let reg = g.regressions[cfg].as_ref().ok_or_else(|| self.unfitted(v, cfg))?;
                let x = self.continuous_parent_values(v, row)?;
                Ok(reg.log_density(row[v].as_f64().expect("continuous value"), &x))
            }
        }
    }

    pub fn to_document(&self) -> FitDocument {
        FitDocument {
            nodes: self.dag.nodes_vec(),
            edges: self.dag.named_edges(),
            locals: self.locals.clone(),
            loglik: self.loglik(),
            n_params: self.n_params(),
            n_obs: self.n_obs,
            bic: self.bic(),
            aic: self.aic(),
        }
    }
}
