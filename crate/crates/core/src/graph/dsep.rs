use std::collections::VecDeque;

use super::{Dag, GraphError};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    /// Arrived from a child: travelling against edge direction.
    Up,
    /// Arrived from a parent.
    Down,
}

impl Dag {
    /// d-separation of `x` and `y` given `z`, by reachability over
    /// (node, direction) states. Runs in O(V + E).
    pub fn d_separated(&self, x: &[usize], y: &[usize], z: &[usize]) -> Result<bool, GraphError> {
        let n = self.len();
        let mut role = vec![0u8; n];
        for (tag, set) in [(1u8, x), (2, y), (4, z)] {
            for &v in set {
                if role[v] & !tag != 0 {
                    return Err(GraphError::OverlappingSets(self.name(v).to_string()));
                }
                role[v] |= tag;
            }
        }
        let in_z = |v: usize| role[v] & 4 != 0;

        // Z together with its ancestors: colliders in here are open.
        let mut z_anc = vec![false; n];
        let mut stack: Vec<usize> = z.to_vec();
        while let Some(v) = stack.pop() {
            if z_anc[v] {
                continue;
            }
            z_anc[v] = true;
            stack.extend(self.parents(v).iter().copied());
        }

        let mut visited = vec![[false; 2]; n];
        let mut queue: VecDeque<(usize, Dir)> = x.iter().map(|&v| (v, Dir::Up)).collect();
        while let Some((v, dir)) = queue.pop_front() {
            let slot = dir as usize;
            if visited[v][slot] {
                continue;
            }
            visited[v][slot] = true;
            if !in_z(v) && role[v] & 2 != 0 {
                return Ok(false);
            }
            match dir {
                Dir::Up if !in_z(v) => {
                    queue.extend(self.parents(v).iter().map(|&p| (p, Dir::Up)));
                    queue.extend(self.children(v).iter().map(|&c| (c, Dir::Down)));
                }
                Dir::Up => {}
                Dir::Down => {
                    if !in_z(v) {
                        queue.extend(self.children(v).iter().map(|&c| (c, Dir::Down)));
                    }
                    if z_anc[v] {
                        queue.extend(self.parents(v).iter().map(|&p| (p, Dir::Up)));
                    }
                }
            }
        }
        Ok(true)
    }

    /// Name-based form of [`Dag::d_separated`].
    pub fn d_separated_named<S: AsRef<str>>(&self, x: &[S], y: &[S], z: &[S]) -> Result<bool, GraphError> {
        let x = self.nodes().indices(x)?;
        let y = self.nodes().indices(y)?;
        let z = self.nodes().indices(z)?;
        self.d_separated(&x, &y, &z)
    }
}

#[cfg(test)]
mod tests {
    use crate::graph::{Dag, GraphError, Nodes};

    fn dag(names: &[&str], edges: &[(&str, &str)]) -> Dag {
        Dag::from_edges(Nodes::continuous(names).unwrap(), edges).unwrap()
    }

    #[test]
    fn collider_blocks_marginally_opens_when_conditioned() {
        let g = dag(&["X", "Z", "Y"], &[("X", "Z"), ("Y", "Z")]);
        assert!(g.d_separated_named(&["X"], &["Y"], &[]).unwrap());
        assert!(!g.d_separated_named(&["X"], &["Y"], &["Z"]).unwrap());
    }

    #[test]
    fn collider_descendant_opens_path() {
        let g = dag(&["X", "Z", "Y", "W"], &[("X", "Z"), ("Y", "Z"), ("Z", "W")]);
        assert!(!g.d_separated_named(&["X"], &["Y"], &["W"]).unwrap());
    }

    #[test]
    fn serial_blocked_by_middle() {
        let g = dag(&["X", "Z", "Y"], &[("X", "Z"), ("Z", "Y")]);
        assert!(!g.d_separated_named(&["X"], &["Y"], &[]).unwrap());
        assert!(g.d_separated_named(&["X"], &["Y"], &["Z"]).unwrap());
    }

    #[test]
    fn overlapping_sets_rejected() {
        let g = dag(&["X", "Z", "Y"], &[("X", "Z")]);
        assert!(matches!(
            g.d_separated_named(&["X"], &["Y"], &["X"]),
            Err(GraphError::OverlappingSets(_))
        ));
    }
}
