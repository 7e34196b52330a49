use serde::{Deserialize, Serialize};

use super::{ClgbnFit, Local, ModelError};
use crate::data::Value;

/// Conditional mean of a continuous node given its parents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: f64,
    /// The row's discrete-parent configuration was not fitted and the
    /// regression pooled over all configurations was used instead.
    pub fallback: bool,
}

impl ClgbnFit {
    /// Evaluates the regression selected by the row's discrete-parent
    /// configuration at the row's continuous-parent values. Only the
    /// parents of `v` need to be present in `row`.
    pub fn predict_node(&self, v: usize, row: &[Value]) -> Result<Prediction, ModelError> {
        let Local::Gaussian(g) = self.local(v) else {
            return Err(ModelError::NotContinuous(self.dag().name(v).to_string()));
        };
        let cfg = self.config_of(v, row)?;
        let x = self.continuous_parent_values(v, row)?;
        match (&g.regressions[cfg], &g.fallback) {
            (Some(reg), _) => Ok(Prediction {
                value: reg.mean(&x),
                fallback: false,
            }),
            (None, Some(pooled)) => {
                log::warn!("node `{}`: configuration #{cfg} unfitted, using pooled regression", g.node);
                let x = if pooled.coefficients.is_empty() { Vec::new() } else { x };
                Ok(Prediction {
                    value: pooled.mean(&x),
                    fallback: true,
                })
            }
            (None, None) => Err(ModelError::EmptyConfiguration {
                node: g.node.clone(),
                config: format!("#{cfg}"),
            }),
        }
    }

    pub fn predict_node_named(&self, name: &str, row: &[Value]) -> Result<Prediction, ModelError> {
        let v = self.dag().node(name)?;
        self.predict_node(v, row)
    }
}
