//! Conditional linear Gaussian Bayesian networks.
//!
//! Discrete nodes carry a conditional probability table indexed by the
//! configuration of their (necessarily discrete) parents. Continuous nodes
//! carry one linear regression per configuration of their discrete parents,
//! with the continuous parents as regressors. Continuous nodes may never be
//! parents of discrete ones.
//!
//! Log-likelihoods are natural-log and the information criteria are on the
//! "larger is better" scale: `bic = loglik - k/2 ln n`, `aic = loglik - k`.

mod fit;
mod predict;
mod sample;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::DataError;
use crate::graph::{Dag, GraphError, NodeKind};

pub use fit::{
    fit, fit_with, local_fit, ClgbnFit, FitDocument, FitOptions, Local, LocalDiscrete, LocalGaussian, LocalResult, Regression,
};
pub use predict::Prediction;

/// Floor applied to residual variances.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("continuous node `{from}` cannot be a parent of discrete node `{to}`")]
    ContinuousParentOfDiscrete { from: String, to: String },
    #[error("graph nodes do not match the table columns: {0}")]
    SchemaMismatch(String),
    #[error("node `{node}`: parent configuration {config} has no observations")]
    EmptyConfiguration { node: String, config: String },
    #[error("node `{node}`: parent configuration {config} has {rows} rows, {required} required")]
    InsufficientRows {
        node: String,
        config: String,
        rows: usize,
        required: usize,
    },
    #[error("node `{node}`: level `{level}` is not in the fitted level set")]
    UnknownLevel { node: String, level: String },
    #[error("node `{0}` is not continuous")]
    NotContinuous(String),
    #[error("node `{node}`: parent `{parent}` is missing from the row")]
    MissingParent { node: String, parent: String },
    #[error("model has no observations")]
    NoObservations,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Whether no edge runs from a continuous node into a discrete one.
pub fn check_clgbn_constraint(dag: &Dag) -> bool {
    clgbn_violation(dag).is_none()
}

/// The first edge (in edge order) violating the CLGBN constraint.
pub fn clgbn_violation(dag: &Dag) -> Option<(usize, usize)> {
    dag.edges()
        .find(|&(a, b)| dag.kind(a) == NodeKind::Continuous && dag.kind(b) == NodeKind::Discrete)
}

/// Network score used by structure search and model comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Score {
    #[default]
    Bic,
    Aic,
}

impl Score {
    /// Penalty subtracted from the log-likelihood.
    pub fn penalty(self, n_params: usize, n_obs: usize) -> f64 {
        match self {
            Score::Bic => 0.5 * n_params as f64 * (n_obs as f64).ln(),
            Score::Aic => n_params as f64,
        }
    }

    pub fn local(self, loglik: f64, n_params: usize, n_obs: usize) -> f64 {
        loglik - self.penalty(n_params, n_obs)
    }
}

impl std::fmt::Display for Score {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Score::Bic => "bic",
            Score::Aic => "aic",
        })
    }
}

impl std::str::FromStr for Score {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bic" => Ok(Score::Bic),
            "aic" => Ok(Score::Aic),
            other => Err(format!("unknown score `{other}` (expected bic or aic)")),
        }
    }
}
