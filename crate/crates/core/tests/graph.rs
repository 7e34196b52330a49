mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::oracles;
use hybridbn::graph::{Dag, Nodes};
use proptest::prelude::*;

fn nodes(n: usize) -> Nodes {
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    Nodes::continuous(&names).unwrap()
}

fn dag(n: usize, edges: &[(usize, usize)]) -> Dag {
    Dag::from_index_edges(nodes(n), edges).unwrap()
}

#[test]
fn d_separation_matches_path_oracle_on_random_dags() {
    let mut rng = common::rng(1);
    for _ in 0..150 {
        let n = 6 + (rand::Rng::random::<u32>(&mut rng) % 2) as usize;
        let edges = oracles::random_dag(n, 0.35, &mut rng);
        let g = dag(n, &edges);
        let m = oracles::adjacency(n, &edges);
        for x in 0..n {
            for y in x + 1..n {
                let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                for z in oracles::subsets(&rest).into_iter().step_by(3) {
                    assert_eq!(g.d_separated(&[x], &[y], &z).unwrap(), oracles::d_separated(&m, x, y, &z), "{edges:?} {x} {y} {z:?}");
                }
            }
        }
    }
}

#[test]
fn set_d_separation_is_pairwise() {
    let mut rng = common::rng(2);
    for _ in 0..100 {
        let edges = oracles::random_dag(6, 0.4, &mut rng);
        let g = dag(6, &edges);
        let m = oracles::adjacency(6, &edges);
        let (xs, ys, zs) = (vec![0, 1], vec![2, 3], vec![4]);
        let expected = xs.iter().all(|&x| ys.iter().all(|&y| oracles::d_separated(&m, x, y, &zs)));
        assert_eq!(g.d_separated(&xs, &ys, &zs).unwrap(), expected);
    }
}

#[test]
fn markov_blanket_shields_the_node() {
    let mut rng = common::rng(3);
    for _ in 0..100 {
        let n = 7;
        let edges = oracles::random_dag(n, 0.3, &mut rng);
        let g = dag(n, &edges);
        let m = oracles::adjacency(n, &edges);
        for v in 0..n {
            let mb: Vec<usize> = g.markov_blanket(v).into_iter().collect();
            assert_eq!(mb, oracles::markov_blanket(&m, v));
            for w in (0..n).filter(|w| *w != v && !mb.contains(w)) {
                assert!(oracles::d_separated(&m, v, w, &mb));
            }
        }
    }
}

/// The equivalence class computed from DAG structure must agree with the
/// class obtained by grouping all DAGs on the same nodes by their complete
/// list of independence statements.
#[test]
fn cpdag_matches_independence_classes_exhaustively() {
    for n in 2..=4 {
        let dags = oracles::all_dags(n);
        let mut classes: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
        for (i, edges) in dags.iter().enumerate() {
            classes.entry(oracles::independence_signature(&oracles::adjacency(n, edges))).or_default().push(i);
        }
        for members in classes.values() {
            let cpdags: BTreeSet<_> = members
                .iter()
                .map(|&i| {
                    let p = dag(n, &dags[i]).equivalence_class();
                    (p.directed_edges().collect::<Vec<_>>(), p.undirected_edges().collect::<Vec<_>>())
                })
                .collect();
            assert_eq!(cpdags.len(), 1, "class members disagree on the CPDAG");
            let (directed, undirected) = cpdags.into_iter().next().unwrap();
            for a in 0..n {
                for b in 0..n {
                    let all = members.iter().all(|&i| dags[i].contains(&(a, b)));
                    assert_eq!(directed.contains(&(a, b)), all, "n={n} edge {a}->{b}");
                }
            }
            for &(a, b) in &undirected {
                assert!(members.iter().any(|&i| dags[i].contains(&(a, b))));
                assert!(members.iter().any(|&i| dags[i].contains(&(b, a))));
            }
            let first = dag(n, &dags[members[0]]);
            assert!(members.iter().all(|&i| first.markov_equivalent(&dag(n, &dags[i]))));
        }
        let reps: Vec<Dag> = classes.values().map(|m| dag(n, &dags[m[0]])).collect();
        for (i, a) in reps.iter().enumerate() {
            for b in &reps[i + 1..] {
                assert!(!a.markov_equivalent(b));
            }
        }
    }
}

#[test]
fn eleven_node_reference_network() {
    let order = ["X1", "X2", "X6", "X7", "X8", "X3", "X9", "X10", "X4", "X11", "X5"];
    let edges = [
        ("X6", "X8"),
        ("X1", "X3"),
        ("X2", "X3"),
        ("X2", "X9"),
        ("X7", "X9"),
        ("X7", "X10"),
        ("X8", "X4"),
        ("X3", "X4"),
        ("X9", "X4"),
        ("X9", "X11"),
        ("X4", "X5"),
    ];
    let g = Dag::from_edges(Nodes::continuous(&order).unwrap(), &edges).unwrap();
    let mb: BTreeSet<&str> = g.markov_blanket(g.node("X3").unwrap()).iter().map(|&v| g.name(v)).collect();
    assert_eq!(mb, BTreeSet::from(["X1", "X2", "X4", "X8", "X9"]));
    assert_eq!(
        g.factorization().to_string(),
        "P(X1)P(X2)P(X6)P(X7)P(X8|X6)P(X3|X1,X2)P(X9|X2,X7)P(X10|X7)P(X4|X8,X3,X9)P(X11|X9)P(X5|X4)"
    );
    let converging = g.classify_connection(g.node("X1").unwrap(), g.node("X3").unwrap(), g.node("X2").unwrap()).unwrap();
    assert!(converging.is_vstructure());
}

proptest! {
    #[test]
    fn edits_keep_the_graph_acyclic(ops in proptest::collection::vec((0usize..6, 0usize..6, 0u8..3), 0..60)) {
        let mut g = dag(6, &[]);
        for (a, b, op) in ops {
            let before = g.clone();
            let res = match op {
                0 => g.add_edge(a, b),
                1 => g.remove_edge(a, b),
                _ => g.reverse_edge(a, b),
            };
            if res.is_err() {
                prop_assert_eq!(&g, &before);
            }
            let edges: Vec<_> = g.edges().collect();
            prop_assert!(oracles::is_acyclic(&oracles::adjacency(6, &edges)));
        }
    }

    #[test]
    fn topological_order_respects_edges(seed in 0u64..10_000) {
        let edges = oracles::random_dag(8, 0.4, &mut common::rng(seed));
        let g = dag(8, &edges);
        let order = g.topological_order();
        let pos: Vec<usize> = (0..8).map(|v| order.iter().position(|&u| u == v).unwrap()).collect();
        for (a, b) in edges {
            prop_assert!(pos[a] < pos[b]);
        }
        for v in 0..8 {
            let deg = g.parents(v).len() + g.children(v).len();
            prop_assert!(g.markov_blanket(v).len() >= deg);
            for w in g.markov_blanket(v) {
                prop_assert!(g.markov_blanket(w).contains(&v));
            }
        }
    }
}
