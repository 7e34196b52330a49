//! Hybrid Bayesian networks over mixed discrete and continuous data.
//!
//! The crate covers the whole estimation pipeline:
//!
//! - [`graph`]: DAGs and partially directed graphs, d-separation, Markov
//!   blankets, equivalence classes, degree tables and DOT output.
//! - [`data`]: mixed tables, CSV ingest, nearest-neighbour imputation and
//!   normalising transforms.
//! - [`model`]: conditional linear Gaussian parameter fitting, BIC/AIC,
//!   prediction and forward sampling.
//! - [`search`]: hill-climbing with random restarts under blacklists and
//!   whitelists.
//! - [`averaging`]: bootstrap arc strengths and the thresholded consensus
//!   network.
//! - [`validation`]: k-fold posterior mean squared error and model
//!   comparison tables.
//! - [`analytics`]: components, influence sets, connection inventories and
//!   domain-level summaries.
//!
//! ```
//! use hybridbn::graph::{Dag, Nodes};
//!
//! let nodes = Nodes::continuous(&["A", "B", "C"]).unwrap();
//! let dag = Dag::from_edges(nodes, &[("A", "C"), ("B", "C")]).unwrap();
//! assert_eq!(dag.factorization().to_string(), "P(A)P(B)P(C|A,B)");
//! assert!(dag.d_separated_named(&["A"], &["B"], &[]).unwrap());
//! assert!(!dag.d_separated_named(&["A"], &["B"], &["C"]).unwrap());
//! ```

pub mod analytics;
pub mod averaging;
pub mod data;
pub mod graph;
pub mod model;
pub mod search;
pub mod validation;
