//! Bootstrap model averaging: relearn the structure on resampled data and
//! keep the edges that recur often enough.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, MixedTable};
use crate::graph::{Dag, DotStyle, Node, NodeKind, Nodes, Pdag};
use crate::search::{hill_climb, ConstraintSet, SearchConfig, SearchError};

/// Slack used when comparing frequencies against thresholds.
const THRESHOLD_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AveragingError {
    #[error("invalid averaging configuration: {0}")]
    Config(String),
    #[error("replicate graphs do not share one node set")]
    NodeSetMismatch,
    #[error("no replicate graphs")]
    NoReplicates,
    #[error("replicate {replicate}: {source}")]
    Search { replicate: usize, source: SearchError },
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AveragingConfig {
    pub replicates: usize,
    pub strength_threshold: f64,
    pub direction_threshold: f64,
    pub seed: u64,
}

impl Default for AveragingConfig {
    fn default() -> Self {
        AveragingConfig {
            replicates: 1000,
            strength_threshold: 0.85,
            direction_threshold: 0.7,
            seed: 0,
        }
    }
}

impl AveragingConfig {
    pub fn validate(&self) -> Result<(), AveragingError> {
        if self.replicates == 0 {
            return Err(AveragingError::Config("replicates must be at least 1".into()));
        }
        for (name, t) in [("strength_threshold", self.strength_threshold), ("direction_threshold", self.direction_threshold)] {
            if !(t > 0.5 && t <= 1.0) {
                return Err(AveragingError::Config(format!("{name} must lie in (0.5, 1], got {t}")));
            }
        }
        Ok(())
    }
}

/// Frequency of one unordered pair across replicates; `a` precedes `b` in
/// node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStrength {
    pub a: String,
    pub b: String,
    /// Fraction of replicates with an edge between `a` and `b`.
    pub strength: f64,
    /// Among those, the fraction oriented `a -> b`.
    pub direction_ab: f64,
    pub count: usize,
    pub count_ab: usize,
}

impl EdgeStrength {
    pub fn direction_ba(&self) -> f64 {
        1.0 - self.direction_ab
    }
}

/// Thresholded consensus of a set of replicate structures.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedGraph {
    pub pdag: Pdag,
    /// Every pair seen at least once, in node-pair order.
    pub strengths: Vec<EdgeStrength>,
    pub config: AveragingConfig,
}

/// JSON form of an [`AveragedGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedDocument {
    pub nodes: Vec<Node>,
    pub directed: Vec<(String, String)>,
    pub undirected: Vec<(String, String)>,
    pub strengths: Vec<EdgeStrength>,
    pub config: AveragingConfig,
}

/// Row indices drawn uniformly with replacement.
pub fn bootstrap_rows<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// A bootstrap resample of `t` with as many rows as `t`.
pub fn bootstrap_resample(t: &MixedTable, seed: u64) -> Result<MixedTable, DataError> {
    if t.n_rows() == 0 {
        return Err(DataError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(t.select_rows(&bootstrap_rows(t.n_rows(), &mut rng)))
}

/// Edge frequencies over `dags` thresholded into a partially directed
/// graph. A pair is kept when its strength reaches the strength threshold
/// and is directed when one orientation reaches the direction threshold.
pub fn average_structures(dags: &[Dag], cfg: &AveragingConfig) -> Result<AveragedGraph, AveragingError> {
    cfg.validate()?;
    let first = dags.first().ok_or(AveragingError::NoReplicates)?;
    if dags.iter().any(|d| d.nodes() != first.nodes()) {
        return Err(AveragingError::NodeSetMismatch);
    }
    let nodes = first.nodes().clone();
    let m = dags.len() as f64;
    let mut counts: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for dag in dags {
        for (from, to) in dag.edges() {
            let entry = counts.entry((from.min(to), from.max(to))).or_default();
            entry.0 += 1;
            if from < to {
                entry.1 += 1;
            }
        }
    }
    let mut pdag = Pdag::empty(nodes.clone());
    let mut strengths = Vec::with_capacity(counts.len());
    for (&(a, b), &(count, count_ab)) in &counts {
        let strength = count as f64 / m;
        let direction_ab = count_ab as f64 / count as f64;
        if strength >= cfg.strength_threshold - THRESHOLD_EPS {
            if direction_ab >= cfg.direction_threshold - THRESHOLD_EPS {
                pdag.add_directed(a, b).expect("pairs are distinct");
            } else if 1.0 - direction_ab >= cfg.direction_threshold - THRESHOLD_EPS {
                pdag.add_directed(b, a).expect("pairs are distinct");
            } else {
                pdag.add_undirected(a, b).expect("pairs are distinct");
            }
        }
        strengths.push(EdgeStrength {
            a: nodes.name(a).to_string(),
            b: nodes.name(b).to_string(),
            strength,
            direction_ab,
            count,
            count_ab,
        });
    }
    Ok(AveragedGraph {
        pdag,
        strengths,
        config: *cfg,
    })
}

/// Provenance of one bootstrap replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub index: usize,
    pub search_seed: u64,
    pub score: f64,
    pub n_edges: usize,
    pub steps: usize,
}

/// Random stream of replicate `i`: ChaCha8 keyed by the averaging seed,
/// stream number `i`. Independent of scheduling.
fn replicate_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// Resamples, relearns and averages `avg.replicates` times in parallel.
/// Each replicate draws its rows and its search seed from its own stream,
/// so `search.seed` is ignored; results do not depend on the thread count.
pub fn learn_averaged(
    t: &MixedTable,
    constraints: &ConstraintSet,
    search: &SearchConfig,
    avg: &AveragingConfig,
) -> Result<(AveragedGraph, Vec<ReplicateRecord>), AveragingError> {
    avg.validate()?;
    t.require_complete()?;
    if t.n_rows() == 0 {
        return Err(DataError::Empty.into());
    }
    let runs: Vec<(Dag, ReplicateRecord)> = (0..avg.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(avg.seed, i);
            let sample = t.select_rows(&bootstrap_rows(t.n_rows(), &mut rng));
            let cfg = SearchConfig {
                seed: rng.random(),
                ..*search
            };
            let (dag, trace) =
                hill_climb(&sample, constraints, &cfg).map_err(|source| AveragingError::Search { replicate: i, source })?;
            let record = ReplicateRecord {
                index: i,
                search_seed: cfg.seed,
                score: trace.final_score,
                n_edges: dag.n_edges(),
                steps: trace.steps.len(),
            };
            Ok((dag, record))
        })
        .collect::<Result<_, AveragingError>>()?;
    let (dags, records): (Vec<Dag>, Vec<ReplicateRecord>) = runs.into_iter().unzip();
    log::info!("averaged {} replicates", dags.len());
    Ok((average_structures(&dags, avg)?, records))
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" { "0".into() } else { s.to_string() }
}

impl AveragedGraph {
    pub fn nodes(&self) -> &Nodes {
        self.pdag.nodes()
    }

    pub fn strength(&self, a: &str, b: &str) -> Option<&EdgeStrength> {
        self.strengths
            .iter()
            .find(|s| (s.a == a && s.b == b) || (s.a == b && s.b == a))
    }

    /// Pairs with an edge in the consensus graph.
    pub fn retained(&self) -> impl Iterator<Item = &EdgeStrength> + '_ {
        let nodes = self.nodes();
        self.strengths.iter().filter(move |s| {
            let (a, b) = (nodes.index_of(&s.a).unwrap(), nodes.index_of(&s.b).unwrap());
            self.pdag.adjacent(a, b)
        })
    }

    /// Strength table with columns `from,to,strength,direction`: two rows
    /// per observed pair, one per orientation, where `direction` is the
    /// share of that orientation among replicates containing the pair.
    pub fn strengths_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["from", "to", "strength", "direction"]).expect("in-memory write");
        for s in &self.strengths {
            let st = fmt_num(s.strength);
            w.write_record([s.a.as_str(), s.b.as_str(), &st, &fmt_num(s.direction_ab)])
                .expect("in-memory write");
            w.write_record([s.b.as_str(), s.a.as_str(), &st, &fmt_num(s.direction_ba())])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 names")
    }

    /// DOT rendering with each retained edge labelled by its strength.
    pub fn to_dot(&self, mut style: DotStyle) -> String {
        for s in self.retained() {
            style
                .edge_labels
                .entry((s.a.clone(), s.b.clone()))
                .or_insert_with(|| format!("{:.3}", s.strength));
            style
                .edge_labels
                .entry((s.b.clone(), s.a.clone()))
                .or_insert_with(|| format!("{:.3}", s.strength));
        }
        self.pdag.to_dot(&style)
    }

    pub fn to_document(&self) -> AveragedDocument {
        let name = |(a, b): (usize, usize)| (self.nodes().name(a).to_string(), self.nodes().name(b).to_string());
        AveragedDocument {
            nodes: self.nodes().iter().cloned().collect(),
            directed: self.pdag.directed_edges().map(name).collect(),
            undirected: self.pdag.undirected_edges().map(name).collect(),
            strengths: self.strengths.clone(),
            config: self.config,
        }
    }

    pub fn from_document(doc: AveragedDocument) -> Result<AveragedGraph, AveragingError> {
        let nodes = Nodes::new(doc.nodes).map_err(|_| AveragingError::NodeSetMismatch)?;
        let mut pdag = Pdag::empty(nodes.clone());
        let idx = |n: &str| nodes.index_of(n).map_err(|_| AveragingError::NodeSetMismatch);
        for (a, b) in &doc.directed {
            pdag.add_directed(idx(a)?, idx(b)?).map_err(|_| AveragingError::NodeSetMismatch)?;
        }
        for (a, b) in &doc.undirected {
            pdag.add_undirected(idx(a)?, idx(b)?).map_err(|_| AveragingError::NodeSetMismatch)?;
        }
        Ok(AveragedGraph {
            pdag,
            strengths: doc.strengths,
            config: doc.config,
        })
    }

    /// Post-processing: a DAG containing every consensus edge. Edges are
    /// placed strongest first; directed edges keep their orientation and
    /// undirected ones take their majority direction, flipped when that
    /// would close a cycle or point from a continuous into a discrete node.
    /// Edges that fit neither way are skipped and returned.
    pub fn orient(&self) -> (Dag, Vec<(String, String)>) {
        let nodes = self.nodes().clone();
        let mut order: Vec<&EdgeStrength> = self.retained().collect();
        order.sort_by(|x, y| y.strength.total_cmp(&x.strength));
        let mut dag = Dag::empty(nodes.clone());
        let mut skipped = Vec::new();
        let typed_ok = |from: usize, to: usize| !(nodes.kind(from) == NodeKind::Continuous && nodes.kind(to) == NodeKind::Discrete);
        for s in order {
            let (a, b) = (nodes.index_of(&s.a).unwrap(), nodes.index_of(&s.b).unwrap());
            let candidates = if self.pdag.has_directed(a, b) {
                vec![(a, b)]
            } else if self.pdag.has_directed(b, a) {
                vec![(b, a)]
            } else if s.direction_ab >= 0.5 {
                vec![(a, b), (b, a)]
            } else {
                vec![(b, a), (a, b)]
            };
            let placed = candidates
                .into_iter()
                .filter(|&(f, t)| typed_ok(f, t))
                .any(|(f, t)| dag.add_edge(f, t).is_ok());
            if !placed {
                log::warn!("orientation skipped edge {} - {}", s.a, s.b);
                skipped.push((s.a.clone(), s.b.clone()));
            }
        }
        (dag, skipped)
    }
}
