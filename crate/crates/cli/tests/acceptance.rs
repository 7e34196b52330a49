//! One line per acceptance criterion. Exits non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{oracles, stats};
use hybridbn::averaging::{average_structures, learn_averaged, AveragingConfig};
use hybridbn::data::{
    apply_transform, knn_impute, pearson_normality, select_transform, write_csv, ColumnOptions, Transform, TransformKind,
};
use hybridbn::graph::{Dag, NodeKind, Nodes, Pdag};
use hybridbn::model::{local_fit, FitOptions, Score};
use hybridbn::search::{hill_climb, network_score, ConstraintSet, SearchConfig};
use hybridbn::validation::{cross_validate, CvConfig, CvModel};
use rand::Rng;
use rand_distr::{Distribution, LogNormal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn names(n: usize) -> Nodes {
    let v: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    Nodes::continuous(&v).unwrap()
}

fn dsep_exhaustive() -> Outcome {
    let start = Instant::now();
    let (mut queries, mut wrong) = (0usize, 0usize);
    for n in 1..=5 {
        let nodes = names(n);
        for edges in oracles::all_dags(n) {
            let g = Dag::from_index_edges(nodes.clone(), &edges).unwrap();
            let m = oracles::adjacency(n, &edges);
            for x in 0..n {
                for y in x + 1..n {
                    let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                    for z in oracles::subsets(&rest) {
                        queries += 1;
                        if g.d_separated(&[x], &[y], &z).unwrap() != oracles::d_separated(&m, x, y, &z) {
                            wrong += 1;
                        }
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(wrong == 0 && secs < 60.0, format!("{queries} queries, {wrong} disagreements, {secs:.1} s"))
}

fn markov_blankets() -> Outcome {
    let mut r = common::rng(20);
    let mut failures = 0;
    for _ in 0..500 {
        let n = r.random_range(2..=10);
        let edges = oracles::random_dag(n, r.random_range(0.1..0.6), &mut r);
        let g = Dag::from_index_edges(names(n), &edges).unwrap();
        let m = oracles::adjacency(n, &edges);
        let ok = (0..n).all(|v| {
            let mb = g.markov_blanket(v);
            mb.iter().copied().collect::<Vec<_>>() == oracles::markov_blanket(&m, v)
                && mb.iter().all(|&w| g.markov_blanket(w).contains(&v))
                && mb.len() >= g.parents(v).len() + g.children(v).len()
        });
        failures += usize::from(!ok);
    }
    check(failures == 0, format!("500 graphs, {failures} failures"))
}

fn reference_network() -> Outcome {
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
    let mb: Vec<&str> = g.markov_blanket(g.node("X3").unwrap()).iter().map(|&v| g.name(v)).collect();
    let mut sorted = mb.clone();
    sorted.sort();
    let f = g.factorization().to_string();
    let want = "P(X1)P(X2)P(X6)P(X7)P(X8|X6)P(X3|X1,X2)P(X9|X2,X7)P(X10|X7)P(X4|X8,X3,X9)P(X11|X9)P(X5|X4)";
    check(sorted == ["X1", "X2", "X4", "X8", "X9"] && f == want, format!("MB(X3) = {{{}}}, {f}", mb.join(",")))
}

fn score_equivalence() -> Outcome {
    let mut r = common::rng(40);
    let dags = oracles::all_dags(3);
    let mut classes: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    for (i, e) in dags.iter().enumerate() {
        classes.entry(oracles::independence_signature(&oracles::adjacency(3, e))).or_default().push(i);
    }
    let (mut worst_eq, mut worst_dec) = (0f64, 0f64);
    for seed in 0..100 {
        let w: Vec<f64> = (0..3).map(|_| r.random_range(-2.0..2.0)).collect();
        let cols = common::linear_gaussian(200, 3, &[(0, 1, w[0]), (1, 2, w[1]), (0, 2, w[2])], 400 + seed);
        let t = common::continuous_table(&cols);
        for members in classes.values() {
            let scores: Vec<f64> = members
                .iter()
                .map(|&i| network_score(&Dag::from_index_edges(t.schema(), &dags[i]).unwrap(), &t, Score::Bic).unwrap())
                .collect();
            for s in &scores {
                worst_eq = worst_eq.max((s - scores[0]).abs());
            }
        }
        for e in &dags {
            let parts: f64 = (0..3)
                .map(|v| {
                    let p: Vec<usize> = e.iter().filter(|x| x.1 == v).map(|x| x.0).collect();
                    let l = local_fit(&t, v, &p, FitOptions::default()).unwrap();
                    Score::Bic.local(l.loglik, l.n_params, 200)
                })
                .sum();
            worst_dec = worst_dec.max((parts - stats::gaussian_bic(&cols, e)).abs());
        }
    }
    check(
        worst_eq <= 1e-8 && worst_dec <= 1e-9,
        format!("max gap within classes {worst_eq:.1e}, decomposed vs monolithic {worst_dec:.1e}"),
    )
}

/// Structural Hamming distance between two partially directed graphs on the
/// same nodes: pairs whose edge mark differs.
fn shd(a: &Pdag, b: &Pdag) -> usize {
    let mark = |g: &Pdag, x: usize, y: usize| {
        if g.has_undirected(x, y) {
            3
        } else if g.has_directed(x, y) {
            1
        } else if g.has_directed(y, x) {
            2
        } else {
            0
        }
    };
    let n = a.len();
    (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).filter(|&(x, y)| mark(a, x, y) != mark(b, x, y)).count()
}

fn recovery_config(seed: u64) -> SearchConfig {
    SearchConfig {
        restarts: 10,
        seed,
        ..Default::default()
    }
}

fn structure_recovery() -> Outcome {
    let model = common::six_node_network();
    let truth = model.dag().equivalence_class();
    let start = Instant::now();
    let mut hits = 0;
    for seed in 0..20 {
        let t = common::sample(&model, 1000, 500 + seed);
        let (g, _) = hill_climb(&t, &ConstraintSet::new(), &recovery_config(seed)).unwrap();
        hits += usize::from(shd(&g.equivalence_class(), &truth) == 0);
    }
    let secs = start.elapsed().as_secs_f64();
    check(hits >= 18 && secs < 30.0, format!("{hits}/20 seeds with SHD 0, {secs:.1} s"))
}

fn averaging() -> Outcome {
    let model = common::six_node_network();
    let dag = model.dag();
    let t = common::sample(&model, 1000, 600);
    let avg = AveragingConfig {
        replicates: 200,
        seed: 6,
        ..Default::default()
    };
    let (g, _) = learn_averaged(&t, &ConstraintSet::new(), &recovery_config(0), &avg).unwrap();
    let strength = |g: &hybridbn::averaging::AveragedGraph, a: usize, b: usize| {
        g.strength(dag.name(a), dag.name(b)).map_or(0.0, |s| s.strength)
    };
    let (mut min_edge, mut max_non) = (1f64, 0f64);
    for a in 0..6 {
        for b in a + 1..6 {
            let s = strength(&g, a, b);
            if dag.adjacent(a, b) {
                min_edge = min_edge.min(s);
            } else {
                max_non = max_non.max(s);
            }
        }
    }

    let (d2, x3) = (dag.node("D2").unwrap(), dag.node("X3").unwrap());
    let mut white = ConstraintSet::new();
    white.require_either(d2, x3);
    let (gw, _) = learn_averaged(&t, &white, &recovery_config(0), &avg).unwrap();
    let forced = strength(&gw, d2, x3);

    let nodes = Nodes::continuous(&["a", "b"]).unwrap();
    let mut dags = vec![Dag::from_edges(nodes.clone(), &[("a", "b")]).unwrap(); 800];
    dags.extend(vec![Dag::from_edges(nodes.clone(), &[("b", "a")]).unwrap(); 100]);
    dags.extend(vec![Dag::empty(nodes); 100]);
    let worked = average_structures(&dags, &AveragingConfig::default()).unwrap();
    let oriented = worked.pdag.has_directed(0, 1);

    check(
        min_edge >= 0.85 && max_non < 0.5 && forced == 1.0 && oriented,
        format!(
            "true edges >= {min_edge:.3}, non-edges <= {max_non:.3}, whitelisted {forced}, 900/800 example oriented a->b: {oriented}"
        ),
    )
}

fn constraint_contract() -> Outcome {
    let model = common::six_node_network();
    let t = common::sample(&model, 200, 700);
    let nodes = t.schema();
    let mut r = common::rng(70);
    let mut failures = 0;
    for i in 0..1000 {
        let mut cs = ConstraintSet::new();
        for _ in 0..r.random_range(0..6) {
            let (a, b) = (r.random_range(0..6), r.random_range(0..6));
            if a != b {
                cs.forbid(a, b);
            }
        }
        for _ in 0..r.random_range(0..4) {
            let (a, b) = (r.random_range(0..6), r.random_range(0..6));
            if a == b || cs.whitelist_entry(a, b).is_some() {
                continue;
            }
            let mut next = cs.clone();
            let added = if r.random_bool(0.5) {
                next.require_directed(a, b).is_ok()
            } else {
                next.require_either(a, b);
                true
            };
            if added && next.initial_dag(&nodes).is_ok() {
                cs = next;
            }
        }
        let cfg = SearchConfig {
            seed: i,
            ..Default::default()
        };
        let (g, _) = hill_climb(&t, &cs, &cfg).unwrap();
        let no_black = cs.blacklist().all(|(a, b)| !g.has_edge(a, b));
        let white = cs.whitelist().all(|w| if w.directed { g.has_edge(w.a, w.b) } else { g.adjacent(w.a, w.b) });
        let typed = g.edges().all(|(a, b)| !(g.kind(a) == NodeKind::Continuous && g.kind(b) == NodeKind::Discrete));
        failures += usize::from(!(no_black && white && typed));
    }
    check(failures == 0, format!("1000 constraint sets, {failures} violations"))
}

fn imputation() -> Outcome {
    let mut failures = 0;
    for seed in 0..50 {
        let (t, k) = common::holed_table(800 + seed);
        let (filled, _) = knn_impute(&t, k).unwrap();
        let numeric: Vec<bool> = t.columns().iter().map(|c| c.kind() == NodeKind::Continuous).collect();
        let matches = common::to_cells(&filled) == stats::impute(&common::to_cells(&t), &numeric, k);
        let idempotent = knn_impute(&filled, k).unwrap().0 == filled;
        failures += usize::from(!(matches && idempotent));
    }
    check(failures == 0, format!("50 tables, {failures} mismatches"))
}

fn transforms() -> Outcome {
    let d = LogNormal::new(0.0, 1.0).unwrap();
    let mut r = common::rng(90);
    let x: Vec<f64> = (0..160).map(|_| d.sample(&mut r)).collect();
    let raw = pearson_normality(&x).unwrap();
    let best = select_transform("x", &x, &TransformKind::ALL, ColumnOptions::default()).unwrap();
    let oq = select_transform("x", &x, &[TransformKind::OrderedQuantile], ColumnOptions::default()).unwrap();
    let pos = [0.01, 0.5, 1.0, 3.0, 250.0];
    let mixed = [-40.0, -1.0, -0.3, 0.0, 0.7, 9.0];
    let bc = apply_transform(&Transform::BoxCox { lambda: 1.0 }, &pos).unwrap();
    let yj = apply_transform(&Transform::YeoJohnson { lambda: 1.0 }, &mixed).unwrap();
    let identities = bc.iter().zip(pos).all(|(a, b)| (a - (b - 1.0)).abs() < 1e-10)
        && yj.iter().zip(mixed).all(|(a, b)| (a - b).abs() < 1e-10);
    check(
        best.normality <= 0.5 * raw && oq.normality <= 1.5 && identities,
        format!(
            "raw {raw:.3}, selected {} {:.3}, ordered quantile {:.3}, lambda = 1 identities: {identities}",
            best.transform.kind(),
            best.normality,
            oq.normality
        ),
    )
}

fn cv_sanity() -> Outcome {
    let cfg = CvConfig {
        folds: 10,
        seed: 1,
        standardize: false,
    };
    let exact = common::noiseless_network();
    let t = common::sample(&exact, 300, 100);
    let zero = cross_validate(&t, &CvModel::Fixed(exact.dag().clone()), &cfg).unwrap().posterior_mse;
    let noisy = common::six_node_network();
    let t = common::sample(&noisy, 2000, 101);
    let unit = cross_validate(&t, &CvModel::Fixed(noisy.dag().clone()), &cfg).unwrap().posterior_mse;
    check(
        zero <= 1e-10 && (unit - 1.0).abs() <= 0.15,
        format!("noiseless {zero:.1e}, unit noise {unit:.4} against residual variance 1"),
    )
}

fn run_average(dir: &Path, seed: &str) -> Vec<Vec<u8>> {
    let out = Command::new(env!("CARGO_BIN_EXE_hybridbn"))
        .current_dir(dir)
        .args(["average", "-c", "run.toml", "--seed", seed, "-o", "out"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    ["averaged.json", "strengths.csv", "averaged.dot"].map(|f| fs::read(dir.join("out").join(f)).unwrap()).to_vec()
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let t = common::sample(&common::six_node_network(), 400, 110);
    write_csv(&t, fs::File::create(dir.path().join("data.csv")).unwrap(), "").unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "[data]\npath = \"data.csv\"\n\n[schema]\ndiscrete = [\"D1\", \"D2\"]\n\n[averaging]\nreplicates = 30\n",
    )
    .unwrap();
    let a = run_average(dir.path(), "5");
    let b = run_average(dir.path(), "5");
    let c = run_average(dir.path(), "6");
    let identical = a == b;
    let changed = a[0] != c[0];
    check(identical && changed, format!("identical seed byte-equal: {identical}, new seed changes trace: {changed}"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("d-separation matches path oracle on all DAGs up to 5 nodes", dsep_exhaustive),
        ("Markov blankets on 500 random DAGs", markov_blankets),
        ("11-node reference network blanket and factorization", reference_network),
        ("BIC score equivalence and decomposition", score_equivalence),
        ("structure recovery on the 6-node CLGBN", structure_recovery),
        ("bootstrap averaging thresholds", averaging),
        ("blacklist, whitelist and typing constraints", constraint_contract),
        ("nearest-neighbour imputation oracle", imputation),
        ("normalising transform battery", transforms),
        ("cross-validation sanity", cv_sanity),
        ("end-to-end determinism of `average`", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS  {name}: {d} [{secs:.1} s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
