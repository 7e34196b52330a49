mod common;

use std::collections::BTreeSet;

use hybridbn::averaging::{average_structures, bootstrap_resample, learn_averaged, AveragingConfig};
use hybridbn::data::{Column, MixedTable};
use hybridbn::search::{strategy1_blacklist, SearchConfig};
use rand::Rng;

fn avg(m: usize, seed: u64) -> AveragingConfig {
    AveragingConfig { replicates: m, seed, ..Default::default() }
}

#[test]
fn distinct_row_fraction_near_one_minus_inv_e() {
    let n = 2000;
    let t = MixedTable::new(vec![Column::from_values("i", (0..n).map(|i| i as f64).collect())]).unwrap();
    let mut total = 0.0;
    for seed in 0..1000 {
        let r = bootstrap_resample(&t, seed).unwrap();
        let distinct: BTreeSet<u64> = r.continuous(0).unwrap().iter().map(|v| *v as u64).collect();
        total += distinct.len() as f64 / n as f64;
    }
    let mean = total / 1000.0;
    let expected = 1.0 - (1.0 - 1.0 / n as f64).powi(n);
    assert!((mean - expected).abs() < 0.01, "{mean} vs {expected}");
    assert!((mean - (1.0 - (-1.0f64).exp())).abs() < 0.01);
}

#[test]
fn independent_noise_gives_empty_consensus() {
    let mut rng = common::rng(2);
    let cols = (0..4)
        .map(|j| Column::from_values(format!("N{j}"), (0..400).map(|_| rng.random::<f64>()).collect()))
        .collect();
    let t = MixedTable::new(cols).unwrap();
    let cs = strategy1_blacklist::<&str>(&t.schema(), &[]).unwrap();
    let (g, records) = learn_averaged(&t, &cs, &SearchConfig::default(), &avg(100, 3)).unwrap();
    assert_eq!(g.pdag.n_edges(), 0);
    assert_eq!(records.len(), 100);
}

#[test]
fn whitelisted_pair_has_full_strength() {
    let data = common::sample(&common::six_node_network(), 300, 8);
    let nodes = data.schema();
    let mut cs = strategy1_blacklist::<&str>(&nodes, &[]).unwrap();
    let (d2, x3) = (nodes.index_of("D2").unwrap(), nodes.index_of("X3").unwrap());
    cs.require_either(x3, d2);
    let (g, _) = learn_averaged(&data, &cs, &SearchConfig::default(), &avg(30, 4)).unwrap();
    let s = g.strength("D2", "X3").unwrap();
    assert_eq!(s.strength, 1.0);
    assert_eq!(s.direction_ab, 1.0);
    assert!(g.pdag.has_directed(d2, x3));
    assert!(g.strengths_csv().contains("D2,X3,1,1\n"));
}

#[test]
fn reproducible_and_thread_independent() {
    let data = common::sample(&common::six_node_network(), 300, 9);
    let cs = strategy1_blacklist::<&str>(&data.schema(), &[]).unwrap();
    let run = || learn_averaged(&data, &cs, &SearchConfig::default(), &avg(24, 5)).unwrap();
    let a = run();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = single.install(run);
    assert_eq!(a, b);
    let (c, _) = learn_averaged(&data, &cs, &SearchConfig::default(), &avg(24, 6)).unwrap();
    assert_ne!(a.0.strengths, c.strengths);
}

#[test]
fn raising_threshold_only_prunes() {
    let data = common::sample(&common::six_node_network(), 200, 10);
    let cs = strategy1_blacklist::<&str>(&data.schema(), &[]).unwrap();
    let dags: Vec<_> = (0..40)
        .map(|i| {
            let r = bootstrap_resample(&data, i).unwrap();
            hybridbn::search::hill_climb(&r, &cs, &SearchConfig::default()).unwrap().0
        })
        .collect();
    let mut prev: Option<BTreeSet<(usize, usize)>> = None;
    for t in [0.55, 0.7, 0.85, 0.95, 1.0] {
        let g = average_structures(&dags, &AveragingConfig { strength_threshold: t, ..Default::default() }).unwrap();
        let skel: BTreeSet<(usize, usize)> = g
            .pdag
            .directed_edges()
            .chain(g.pdag.undirected_edges())
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        if let Some(p) = &prev {
            assert!(skel.is_subset(p));
        }
        for s in &g.strengths {
            assert!((0.0..=1.0).contains(&s.strength));
            assert!((s.direction_ab + s.direction_ba() - 1.0).abs() < 1e-15);
        }
        prev = Some(skel);
    }
}

#[test]
fn orientation_yields_a_dag_over_the_consensus() {
    let data = common::sample(&common::six_node_network(), 1000, 11);
    let cs = strategy1_blacklist::<&str>(&data.schema(), &[]).unwrap();
    let (g, _) = learn_averaged(&data, &cs, &SearchConfig::default(), &avg(40, 7)).unwrap();
    let (dag, skipped) = g.orient();
    assert!(skipped.is_empty());
    assert_eq!(dag.n_edges(), g.pdag.n_edges());
    assert!(hybridbn::model::check_clgbn_constraint(&dag));
    for (a, b) in g.pdag.directed_edges() {
        assert!(dag.has_edge(a, b));
    }
}
