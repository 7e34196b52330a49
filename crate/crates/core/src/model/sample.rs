use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal};

use super::{ClgbnFit, Local, ModelError};
use crate::data::{Column, MixedTable, Value};
use crate::graph::{Dag, NodeKind};

impl ClgbnFit {
    /// A model from explicit local distributions, one per node in node
    /// order. Each local must name its node and list exactly the node's
    /// parents. Log-likelihood bookkeeping is zero until refitted.
    pub fn from_locals(dag: Dag, locals: Vec<Local>) -> Result<ClgbnFit, ModelError> {
        if locals.len() != dag.len() {
            return Err(ModelError::SchemaMismatch(format!("{} nodes, {} locals", dag.len(), locals.len())));
        }
        if let Some((a, b)) = super::clgbn_violation(&dag) {
            return Err(ModelError::ContinuousParentOfDiscrete {
                from: dag.name(a).to_string(),
                to: dag.name(b).to_string(),
            });
        }
        for (v, local) in locals.iter().enumerate() {
            let (name, parents, kind, n_configs): (&str, Vec<&String>, NodeKind, usize) = match local {
                Local::Discrete(d) => (&d.node, d.parents.iter().collect(), NodeKind::Discrete, d.cpt.len()),
                Local::Gaussian(g) => (
                    &g.node,
                    g.discrete_parents.iter().chain(&g.continuous_parents).collect(),
                    NodeKind::Continuous,
                    g.regressions.len(),
                ),
            };
            if name != dag.name(v) || kind != dag.kind(v) {
                return Err(ModelError::SchemaMismatch(format!("local #{v} describes `{name}` ({kind})")));
            }
            let mut idx = parents.iter().map(|p| dag.node(p)).collect::<Result<Vec<_>, _>>()?;
            let expected: Vec<usize> = dag.parents(v).iter().copied().collect();
            let split = idx.iter().filter(|&&p| dag.kind(p) == NodeKind::Discrete).count();
            let in_order = idx[..split].windows(2).all(|w| w[0] < w[1]) && idx[split..].windows(2).all(|w| w[0] < w[1]);
            idx.sort_unstable();
            if idx != expected || !in_order {
                return Err(ModelError::SchemaMismatch(format!(
                    "parents of `{name}` must match the graph, discrete first, each group in node order"
                )));
            }
            let cards: usize = match local {
                Local::Discrete(d) => d.parent_cards.iter().product(),
                Local::Gaussian(g) => g.discrete_cards.iter().product(),
            };
            if cards != n_configs {
                return Err(ModelError::SchemaMismatch(format!(
                    "`{name}` has {n_configs} configurations, parent cardinalities give {cards}"
                )));
            }
        }
        let n = dag.len();
        Ok(ClgbnFit {
            dag,
            locals,
            node_loglik: vec![0.0; n],
            node_params: vec![0; n],
            n_obs: 0,
        })
    }

    /// Draws `n` complete rows by ancestral sampling.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<MixedTable, ModelError> {
        let dag = self.dag();
        let order = dag.topological_order();
        let mut rows: Vec<Vec<Value>> = vec![vec![Value::Missing; dag.len()]; n];
        for &v in &order {
            for row in rows.iter_mut() {
                let cfg = self.config_of(v, row)?;
                row[v] = match self.local(v) {
                    Local::Discrete(d) => {
                        let probs = d.cpt[cfg].as_ref().ok_or_else(|| ModelError::EmptyConfiguration {
                            node: d.node.clone(),
                            config: format!("#{cfg}"),
                        })?;
                        let w = WeightedIndex::new(probs)
                            .map_err(|e| ModelError::SchemaMismatch(format!("`{}`: invalid probabilities: {e}", d.node)))?;
                        Value::Discrete(w.sample(rng) as u32)
                    }
                    Local::Gaussian(g) => {
                        let reg = g.regressions[cfg]
                            .as_ref()
                            .or(g.fallback.as_ref())
                            .ok_or_else(|| ModelError::EmptyConfiguration {
                                node: g.node.clone(),
                                config: format!("#{cfg}"),
                            })?;
                        let x = self.continuous_parent_values(v, row)?;
                        let noise = Normal::new(0.0, reg.variance.sqrt())
                            .map_err(|e| ModelError::SchemaMismatch(format!("`{}`: {e}", g.node)))?;
                        Value::Continuous(reg.mean(&x) + noise.sample(rng))
                    }
                };
            }
        }
        let columns = (0..dag.len())
            .map(|v| match self.local(v) {
                Local::Discrete(d) => Column::discrete(
                    d.node.clone(),
                    d.levels.clone(),
                    rows.iter().map(|r| r[v].as_code()).collect(),
                ),
                Local::Gaussian(g) => Column::continuous(g.node.clone(), rows.iter().map(|r| r[v].as_f64()).collect()),
            })
            .collect();
        Ok(MixedTable::new(columns)?)
    }
}
