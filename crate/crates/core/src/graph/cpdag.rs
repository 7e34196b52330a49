use std::collections::BTreeSet;

use super::{Dag, Pdag};

struct Mixed {
    n: usize,
    directed: BTreeSet<(usize, usize)>,
    undirected: BTreeSet<(usize, usize)>,
}

impl Mixed {
    fn dir(&self, a: usize, b: usize) -> bool {
        self.directed.contains(&(a, b))
    }

    fn und(&self, a: usize, b: usize) -> bool {
        self.undirected.contains(&(a.min(b), a.max(b)))
    }

    fn adj(&self, a: usize, b: usize) -> bool {
        self.dir(a, b) || self.dir(b, a) || self.und(a, b)
    }

    fn orient(&mut self, a: usize, b: usize) {
        self.undirected.remove(&(a.min(b), a.max(b)));
        self.directed.insert((a, b));
    }

    /// One pass of Meek's rules 1-3 over every undirected edge, in both
    /// orientations. Returns whether anything changed.
    fn apply_rules(&mut self) -> bool {
        let candidates: Vec<(usize, usize)> = self.undirected.iter().copied().collect();
        let mut changed = false;
        for (u, v) in candidates {
            for (b, c) in [(u, v), (v, u)] {
                if !self.und(b, c) {
                    continue;
                }
                if self.rule1(b, c) || self.rule2(b, c) || self.rule3(b, c) {
                    self.orient(b, c);
                    changed = true;
                }
            }
        }
        changed
    }

    /// a -> b, b - c, a and c non-adjacent  =>  b -> c
    fn rule1(&self, b: usize, c: usize) -> bool {
        (0..self.n).any(|a| a != c && self.dir(a, b) && !self.adj(a, c))
    }

    /// b -> m -> c, b - c  =>  b -> c
    fn rule2(&self, b: usize, c: usize) -> bool {
        (0..self.n).any(|m| self.dir(b, m) && self.dir(m, c))
    }

    /// b - x, b - y, x -> c, y -> c, x and y non-adjacent, b - c  =>  b -> c
    fn rule3(&self, b: usize, c: usize) -> bool {
        let xs: Vec<usize> = (0..self.n)
            .filter(|&x| x != c && self.und(b, x) && self.dir(x, c))
            .collect();
        xs.iter()
            .enumerate()
            .any(|(i, &x)| xs[i + 1..].iter().any(|&y| !self.adj(x, y)))
    }
}

impl Dag {
    /// The completed partially directed graph of this DAG's Markov
    /// equivalence class: v-structure edges oriented, then Meek's rules
    /// applied to a fixpoint, remaining edges undirected.
    pub fn equivalence_class(&self) -> Pdag {
        let mut compelled: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (a, z, b) in self.vstructures() {
            compelled.insert((a, z));
            compelled.insert((b, z));
        }
        let mut g = Mixed {
            n: self.len(),
            directed: BTreeSet::new(),
            undirected: BTreeSet::new(),
        };
        for (a, b) in self.edges() {
            if compelled.contains(&(a, b)) {
                g.directed.insert((a, b));
            } else {
                g.undirected.insert((a.min(b), a.max(b)));
            }
        }
        while g.apply_rules() {}

        let mut p = Pdag::empty(self.nodes().clone());
        for (a, b) in g.directed {
            p.add_directed(a, b).expect("skeleton edges are distinct");
        }
        for (a, b) in g.undirected {
            p.add_undirected(a, b).expect("skeleton edges are distinct");
        }
        p
    }

    /// Same skeleton and same v-structures.
    pub fn markov_equivalent(&self, other: &Dag) -> bool {
        self.nodes() == other.nodes()
            && self.skeleton() == other.skeleton()
            && self.vstructures() == other.vstructures()
    }
}
