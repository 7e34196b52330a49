use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{legal_moves, ConstraintSet, Move, SearchError};
use crate::data::MixedTable;
use crate::graph::Dag;
use crate::model::{local_fit, FitOptions, ModelError, Score};

/// A node paired with a candidate parent list.
type ParentSet = (usize, Vec<usize>);

/// Move index, network score after the move, and the rescored nodes.
type Candidate = (usize, f64, Vec<(usize, f64)>);

/// Smallest score gain accepted as an improvement.
pub const MIN_IMPROVEMENT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Number of perturb-and-climb restarts after the first ascent.
    pub restarts: usize,
    /// Random legal moves applied to the incumbent before each restart.
    pub perturbation_size: usize,
    pub score: Score,
    pub seed: u64,
    pub max_parents: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 2,
            perturbation_size: 5,
            score: Score::Bic,
            seed: 0,
            max_parents: None,
        }
    }
}

/// One accepted move. `phase` 0 is the initial ascent, `i > 0` restart `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub phase: usize,
    #[serde(rename = "move")]
    pub mv: Move,
    pub delta: f64,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub steps: Vec<TraceStep>,
    /// Moves applied at the start of each restart.
    pub perturbations: Vec<Vec<Move>>,
    pub restarts: usize,
    /// Restarts whose local optimum replaced the incumbent.
    pub restarts_improved: usize,
    pub initial_score: f64,
    pub final_score: f64,
}

/// Memoised local scores keyed by node and sorted parent set.
struct ScoreCache<'a> {
    table: &'a MixedTable,
    score: Score,
    cache: HashMap<(usize, Vec<usize>), f64>,
}

impl<'a> ScoreCache<'a> {
    fn compute(table: &MixedTable, score: Score, v: usize, parents: &[usize]) -> Result<f64, SearchError> {
        match local_fit(table, v, parents, FitOptions::default()) {
            Ok(r) => Ok(score.local(r.loglik, r.n_params, table.n_rows())),
            Err(ModelError::EmptyConfiguration { .. } | ModelError::InsufficientRows { .. }) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e.into()),
        }
    }

    /// Fills the cache for every key, computing misses in parallel.
    fn prefetch(&mut self, keys: Vec<ParentSet>) -> Result<(), SearchError> {
        let mut misses: Vec<ParentSet> = keys.into_iter().filter(|k| !self.cache.contains_key(k)).collect();
        misses.sort();
        misses.dedup();
        let (table, score) = (self.table, self.score);
        let computed: Vec<f64> = misses
            .par_iter()
            .map(|(v, ps)| Self::compute(table, score, *v, ps))
            .collect::<Result<_, _>>()?;
        self.cache.extend(misses.into_iter().zip(computed));
        Ok(())
    }

    fn get(&mut self, v: usize, parents: Vec<usize>) -> Result<f64, SearchError> {
        if let Some(&s) = self.cache.get(&(v, parents.clone())) {
            return Ok(s);
        }
        let s = Self::compute(self.table, self.score, v, &parents)?;
        self.cache.insert((v, parents), s);
        Ok(s)
    }
}

fn parent_vec(dag: &Dag, v: usize) -> Vec<usize> {
    dag.parents(v).iter().copied().collect()
}

fn with(dag: &Dag, v: usize, extra: usize) -> Vec<usize> {
    let mut p = parent_vec(dag, v);
    p.push(extra);
    p.sort_unstable();
    p
}

fn without(dag: &Dag, v: usize, drop: usize) -> Vec<usize> {
    dag.parents(v).iter().copied().filter(|&p| p != drop).collect()
}

/// Local-score changes a move causes, as `(node, new parent set)`.
fn affected(dag: &Dag, mv: &Move) -> Vec<ParentSet> {
    match *mv {
        Move::Add { from, to } => vec![(to, with(dag, to, from))],
        Move::Delete { from, to } => vec![(to, without(dag, to, from))],
        Move::Reverse { from, to } => vec![(to, without(dag, to, from)), (from, with(dag, from, to))],
    }
}

fn total(locals: &[f64]) -> f64 {
    locals.iter().sum()
}

struct Climber<'a> {
    cache: ScoreCache<'a>,
    constraints: &'a ConstraintSet,
    max_parents: Option<usize>,
}

impl Climber<'_> {
    fn locals(&mut self, dag: &Dag) -> Result<Vec<f64>, SearchError> {
        self.cache.prefetch((0..dag.len()).map(|v| (v, parent_vec(dag, v))).collect())?;
        (0..dag.len()).map(|v| self.cache.get(v, parent_vec(dag, v))).collect()
    }

    /// Greedy ascent until no legal move gains more than [`MIN_IMPROVEMENT`].
    fn ascend(&mut self, dag: &mut Dag, locals: &mut [f64], phase: usize, steps: &mut Vec<TraceStep>) -> Result<(), SearchError> {
        loop {
            let current = total(locals);
            let moves = legal_moves(dag, self.constraints, self.max_parents);
            let changes: Vec<Vec<ParentSet>> = moves.iter().map(|m| affected(dag, m)).collect();
            self.cache.prefetch(changes.iter().flatten().cloned().collect())?;

            let mut best: Option<Candidate> = None;
            for (i, change) in changes.into_iter().enumerate() {
                let mut updated = Vec::with_capacity(change.len());
                for (v, ps) in change {
                    updated.push((v, self.cache.get(v, ps)?));
                }
                let mut trial = locals.to_vec();
                for &(v, s) in &updated {
                    trial[v] = s;
                }
                let t = total(&trial);
                if best.as_ref().is_none_or(|(_, b, _)| t > *b) {
                    best = Some((i, t, updated));
                }
            }
            let Some((i, new_total, updated)) = best else { break };
            let improves = if current == f64::NEG_INFINITY {
                new_total > f64::NEG_INFINITY
            } else {
                new_total > current + MIN_IMPROVEMENT
            };
            if !improves {
                break;
            }
            moves[i].apply(dag)?;
            for (v, s) in updated {
                locals[v] = s;
            }
            steps.push(TraceStep {
                phase,
                mv: moves[i],
                delta: new_total - current,
                score: new_total,
            });
        }
        Ok(())
    }
}

/// Score-based search with random restarts. The start graph holds the
/// whitelisted edges; each restart perturbs the incumbent with random legal
/// moves and climbs again, replacing the incumbent only on strict
/// improvement. The result is deterministic for a fixed seed.
pub fn hill_climb(table: &MixedTable, constraints: &ConstraintSet, config: &SearchConfig) -> Result<(Dag, SearchTrace), SearchError> {
    let nodes = table.schema();
    table.require_complete()?;
    if table.n_rows() == 0 {
        return Err(SearchError::Data(crate::data::DataError::Empty));
    }
    let mut dag = constraints.initial_dag(&nodes)?;
    let mut climber = Climber {
        cache: ScoreCache {
            table,
            score: config.score,
            cache: HashMap::new(),
        },
        constraints,
        max_parents: config.max_parents,
    };
    let mut trace = SearchTrace::default();
    let mut locals = climber.locals(&dag)?;
    trace.initial_score = total(&locals);
    climber.ascend(&mut dag, &mut locals, 0, &mut trace.steps)?;
    let mut best_score = total(&locals);
    if best_score == f64::NEG_INFINITY {
        return Err(SearchError::DegenerateScore);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for phase in 1..=config.restarts {
        let mut g = dag.clone();
        let mut applied = Vec::with_capacity(config.perturbation_size);
        for _ in 0..config.perturbation_size {
            let moves = legal_moves(&g, constraints, config.max_parents);
            if moves.is_empty() {
                break;
            }
            let mv = moves[rng.random_range(0..moves.len())];
            mv.apply(&mut g)?;
            applied.push(mv);
        }
        trace.perturbations.push(applied);
        trace.restarts += 1;
        let mut g_locals = climber.locals(&g)?;
        climber.ascend(&mut g, &mut g_locals, phase, &mut trace.steps)?;
        let s = total(&g_locals);
        if s > best_score + MIN_IMPROVEMENT {
            dag = g;
            best_score = s;
            trace.restarts_improved += 1;
        }
    }
    trace.final_score = best_score;
    log::debug!(
        "search finished: {} steps, {} restarts ({} improved), score {best_score}",
        trace.steps.len(),
        trace.restarts,
        trace.restarts_improved
    );
    Ok((dag, trace))
}

/// Sum of local scores of `dag` on `table`, with sparse configurations
/// scored as negative infinity.
pub fn network_score(dag: &Dag, table: &MixedTable, score: Score) -> Result<f64, SearchError> {
    let mut total = 0.0;
    for v in 0..dag.len() {
        total += ScoreCache::compute(table, score, v, &parent_vec(dag, v))?;
    }
    Ok(total)
}
