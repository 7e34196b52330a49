use serde::{Deserialize, Serialize};

use super::{mean_std, Dag, Pdag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRow {
    pub node: String,
    pub in_degree: usize,
    pub out_degree: usize,
    pub mb_size: usize,
}

/// Per-node in-degree, out-degree and Markov-blanket size, with column
/// means and population standard deviations in `[in, out, mb]` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeTable {
    pub rows: Vec<DegreeRow>,
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl DegreeTable {
    fn from_rows(rows: Vec<DegreeRow>) -> Self {
        let mut mean = [0.0; 3];
        let mut std = [0.0; 3];
        let cols: [fn(&DegreeRow) -> usize; 3] = [|r| r.in_degree, |r| r.out_degree, |r| r.mb_size];
        for (i, col) in cols.iter().enumerate() {
            let (m, s) = mean_std(rows.iter().map(|r| col(r) as f64));
            mean[i] = m;
            std[i] = s;
        }
        DegreeTable { rows, mean, std }
    }

    pub fn row(&self, node: &str) -> Option<&DegreeRow> {
        self.rows.iter().find(|r| r.node == node)
    }
}

impl Pdag {
    /// Undirected edges count toward neither in- nor out-degree but do
    /// count toward the Markov blanket.
    pub fn degrees(&self) -> DegreeTable {
        DegreeTable::from_rows(
            (0..self.len())
                .map(|v| DegreeRow {
                    node: self.name(v).to_string(),
                    in_degree: self.parents(v).len(),
                    out_degree: self.children(v).len(),
                    mb_size: self.markov_blanket(v).len(),
                })
                .collect(),
        )
    }
}

impl Dag {
    pub fn degrees(&self) -> DegreeTable {
        DegreeTable::from_rows(
            (0..self.len())
                .map(|v| DegreeRow {
                    node: self.name(v).to_string(),
                    in_degree: self.parents(v).len(),
                    out_degree: self.children(v).len(),
                    mb_size: self.markov_blanket(v).len(),
                })
                .collect(),
        )
    }

    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        self.to_pdag().connected_components()
    }
}
