//! Reference implementations used as test oracles. They work on plain
//! adjacency matrices and share no code with the library.

use rand::seq::SliceRandom;
use rand::Rng;

/// `m[a][b]` is true for an edge `a -> b`.
pub type Adj = Vec<Vec<bool>>;

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Adj {
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in edges {
        m[a][b] = true;
    }
    m
}

pub fn is_acyclic(m: &Adj) -> bool {
    // 0 unvisited, 1 on stack, 2 done
    fn visit(m: &Adj, v: usize, state: &mut [u8]) -> bool {
        state[v] = 1;
        for w in 0..m.len() {
            if m[v][w] && (state[w] == 1 || (state[w] == 0 && !visit(m, w, state))) {
                return false;
            }
        }
        state[v] = 2;
        true
    }
    let mut state = vec![0u8; m.len()];
    (0..m.len()).all(|v| state[v] != 0 || visit(m, v, &mut state))
}

/// Every DAG on `n` labelled nodes, as edge lists.
pub fn all_dags(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for mut code in 0..total {
        let mut edges = Vec::new();
        for &(i, j) in &pairs {
            match code % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            code /= 3;
        }
        if is_acyclic(&adjacency(n, &edges)) {
            out.push(edges);
        }
    }
    out
}

/// Random DAG: edges follow a random node order, each present with
/// probability `p`.
pub fn random_dag<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((order[i], order[j]));
            }
        }
    }
    edges
}

pub fn descendants(m: &Adj, v: usize) -> Vec<bool> {
    let mut seen = vec![false; m.len()];
    let mut stack = vec![v];
    seen[v] = true;
    while let Some(u) = stack.pop() {
        for w in 0..m.len() {
            if m[u][w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// d-separation of single nodes `x` and `y` given `z` by enumerating every
/// simple path in the skeleton and checking that each one is blocked.
pub fn d_separated(m: &Adj, x: usize, y: usize, z: &[usize]) -> bool {
    let n = m.len();
    let in_z: Vec<bool> = (0..n).map(|v| z.contains(&v)).collect();
    let desc: Vec<Vec<bool>> = (0..n).map(|v| descendants(m, v)).collect();
    let blocked = |path: &[usize]| {
        path.windows(3).any(|w| {
            let (a, v, b) = (w[0], w[1], w[2]);
            let collider = m[a][v] && m[b][v];
            if collider {
                !(0..n).any(|d| desc[v][d] && in_z[d])
            } else {
                in_z[v]
            }
        })
    };
    fn walk(m: &Adj, path: &mut Vec<usize>, y: usize, on_path: &mut [bool], blocked: &dyn Fn(&[usize]) -> bool) -> bool {
        let u = *path.last().unwrap();
        if u == y {
            return blocked(path);
        }
        for w in 0..m.len() {
            if (m[u][w] || m[w][u]) && !on_path[w] {
                path.push(w);
                on_path[w] = true;
                let ok = walk(m, path, y, on_path, blocked);
                on_path[w] = false;
                path.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let mut on_path = vec![false; n];
    on_path[x] = true;
    walk(m, &mut vec![x], y, &mut on_path, &blocked)
}

/// Parents, children and the children's other parents.
pub fn markov_blanket(m: &Adj, v: usize) -> Vec<usize> {
    let n = m.len();
    (0..n)
        .filter(|&w| w != v && (m[w][v] || m[v][w] || (0..n).any(|c| m[v][c] && m[w][c])))
        .collect()
}

/// All subsets of `items`.
pub fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << items.len())
        .map(|mask| items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect())
        .collect()
}

/// Every d-separation statement `x _|_ y | Z` (x < y) of a DAG, as bits.
pub fn independence_signature(m: &Adj) -> Vec<bool> {
    let n = m.len();
    let mut sig = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
            for z in subsets(&rest) {
                sig.push(d_separated(m, x, y, &z));
            }
        }
    }
    sig
}
