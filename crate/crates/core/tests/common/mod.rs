#![allow(dead_code)]
pub mod oracles;
pub mod stats;

use hybridbn::data::MixedTable;
use hybridbn::graph::{Dag, Node, Nodes};
use hybridbn::model::{ClgbnFit, Local, LocalDiscrete, LocalGaussian, Regression};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn disc(node: &str, n_levels: usize, parents: &[(&str, usize)], cpt: Vec<Vec<f64>>) -> Local {
    Local::Discrete(LocalDiscrete {
        node: node.into(),
        levels: (0..n_levels).map(|l| l.to_string()).collect(),
        parents: parents.iter().map(|p| p.0.to_string()).collect(),
        parent_cards: parents.iter().map(|p| p.1).collect(),
        cpt: cpt.into_iter().map(Some).collect(),
    })
}

/// `regs`: one `(intercept, coefficients, variance)` per discrete configuration.
pub fn gauss(node: &str, dparents: &[(&str, usize)], cparents: &[&str], regs: Vec<(f64, Vec<f64>, f64)>) -> Local {
    Local::Gaussian(LocalGaussian {
        node: node.into(),
        discrete_parents: dparents.iter().map(|p| p.0.to_string()).collect(),
        discrete_cards: dparents.iter().map(|p| p.1).collect(),
        continuous_parents: cparents.iter().map(|p| p.to_string()).collect(),
        regressions: regs
            .into_iter()
            .map(|(intercept, coefficients, variance)| {
                Some(Regression {
                    intercept,
                    coefficients,
                    variance,
                    n: 0,
                    collinear: false,
                })
            })
            .collect(),
        fallback: None,
    })
}

/// Two discrete and four continuous nodes:
/// D1 -> D2, D1 -> X1, D2 -> X2, X1 -> X2, X1 -> X3, X2 -> X4, X3 -> X4.
pub fn six_node_network() -> ClgbnFit {
    let nodes = Nodes::new([
        Node::discrete("D1"),
        Node::discrete("D2"),
        Node::continuous("X1"),
        Node::continuous("X2"),
        Node::continuous("X3"),
        Node::continuous("X4"),
    ])
    .unwrap();
    let dag = Dag::from_edges(
        nodes,
        &[("D1", "D2"), ("D1", "X1"), ("D2", "X2"), ("X1", "X2"), ("X1", "X3"), ("X2", "X4"), ("X3", "X4")],
    )
    .unwrap();
    let locals = vec![
        disc("D1", 2, &[], vec![vec![0.4, 0.6]]),
        disc("D2", 3, &[("D1", 2)], vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]]),
        gauss("X1", &[("D1", 2)], &[], vec![(0.0, vec![], 1.0), (2.0, vec![], 1.0)]),
        gauss(
            "X2",
            &[("D2", 3)],
            &["X1"],
            vec![(0.0, vec![1.2], 1.0), (1.5, vec![1.2], 1.0), (-1.5, vec![1.2], 1.0)],
        ),
        gauss("X3", &[], &["X1"], vec![(0.0, vec![1.0], 1.0)]),
        gauss("X4", &[], &["X2", "X3"], vec![(0.0, vec![1.0, 1.0], 1.0)]),
    ];
    ClgbnFit::from_locals(dag, locals).unwrap()
}

pub fn sample(model: &ClgbnFit, n: usize, seed: u64) -> MixedTable {
    model.sample(n, &mut rng(seed)).unwrap()
}

/// Continuous columns `V0..` from plain vectors.
pub fn continuous_table(cols: &[Vec<f64>]) -> MixedTable {
    MixedTable::new(
        cols.iter()
            .enumerate()
            .map(|(i, c)| hybridbn::data::Column::from_values(format!("V{i}"), c.clone()))
            .collect(),
    )
    .unwrap()
}

/// `n` rows from `x = B x + e` with the given edges and coefficients, unit
/// noise, nodes in topological index order.
#[allow(clippy::needless_range_loop)]
pub fn linear_gaussian(n: usize, p: usize, edges: &[(usize, usize, f64)], seed: u64) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng(seed);
    let mut cols = vec![vec![0.0; n]; p];
    for i in 0..n {
        for v in 0..p {
            let mut x: f64 = StandardNormal.sample(&mut r);
            for &(a, b, w) in edges {
                if b == v {
                    x += w * cols[a][i];
                }
            }
            cols[v][i] = x;
        }
    }
    cols
}

pub fn to_cells(t: &MixedTable) -> Vec<Vec<stats::Cell>> {
    use hybridbn::data::Value;
    (0..t.n_rows())
        .map(|r| {
            t.row(r)
                .into_iter()
                .map(|v| match v {
                    Value::Continuous(x) => stats::Cell::Num(x),
                    Value::Discrete(c) => stats::Cell::Cat(c),
                    Value::Missing => stats::Cell::Na,
                })
                .collect()
        })
        .collect()
}

/// A small mixed table with planted holes: three continuous columns (one
/// rounded so that distance ties occur), one three-level discrete column.
/// Returns the table and a neighbour count it can support.
pub fn holed_table(seed: u64) -> (MixedTable, usize) {
    use hybridbn::data::Column;
    use rand::Rng;
    let mut r = rng(seed);
    let n = r.random_range(12..30);
    let k = r.random_range(1..=5);
    let hole = |r: &mut ChaCha8Rng| r.random_bool(0.12);
    let mut cols = Vec::new();
    for j in 0..3 {
        let v: Vec<Option<f64>> = (0..n)
            .map(|_| {
                let x: f64 = r.random_range(-5.0..5.0);
                let x = if j == 2 { x.round() } else { x };
                (!hole(&mut r)).then_some(x)
            })
            .collect();
        cols.push(Column::continuous(format!("c{j}"), v));
    }
    let codes: Vec<Option<u32>> = (0..n).map(|_| (!hole(&mut r)).then(|| r.random_range(0..3))).collect();
    cols.push(Column::discrete("d", vec!["a".into(), "b".into(), "c".into()], codes));
    let t = MixedTable::new(cols).unwrap();
    let min_observed = t.columns().iter().map(|c| c.len() - c.missing_count()).min().unwrap();
    (t, k.min(min_observed))
}

/// Two discrete roots and three continuous nodes that are exact functions
/// of their parents:
/// D1 -> X1, D2 -> X1, D1 -> X2, X1 -> X2, X1 -> X3, X2 -> X3.
pub fn noiseless_network() -> ClgbnFit {
    let nodes = Nodes::new([
        Node::discrete("D1"),
        Node::discrete("D2"),
        Node::continuous("X1"),
        Node::continuous("X2"),
        Node::continuous("X3"),
    ])
    .unwrap();
    let dag = Dag::from_edges(
        nodes,
        &[("D1", "X1"), ("D2", "X1"), ("D1", "X2"), ("X1", "X2"), ("X1", "X3"), ("X2", "X3")],
    )
    .unwrap();
    let locals = vec![
        disc("D1", 3, &[], vec![vec![0.3, 0.3, 0.4]]),
        disc("D2", 2, &[], vec![vec![0.5, 0.5]]),
        gauss("X1", &[("D1", 3), ("D2", 2)], &[], (0..6).map(|i| (i as f64 * 0.7, vec![], 0.0)).collect()),
        gauss("X2", &[("D1", 3)], &["X1"], vec![(0.0, vec![2.0], 0.0), (1.0, vec![2.0], 0.0), (-1.0, vec![2.0], 0.0)]),
        gauss("X3", &[], &["X1", "X2"], vec![(0.3, vec![1.0, -0.5], 0.0)]),
    ];
    ClgbnFit::from_locals(dag, locals).unwrap()
}
