//! Statistically significant backbones of bipartite projections.
//!
//! A bipartite network of `m` agents and `n` artifacts is projected onto
//! its agents as the co-occurrence matrix `P = B·Bᵀ`. An edge between two
//! agents is kept in the backbone when its observed weight is unusually
//! large compared to the weights produced by a null ensemble of random
//! bipartite networks. Five ensembles are supported:
//!
//! | model | constraint | edge-weight distribution |
//! |-------|------------|--------------------------|
//! | FFM   | total fill, exactly | closed-form sum ([`pmf::ffm_pmf`]) |
//! | FRM   | agent degrees, exactly | hypergeometric ([`pmf::frm_pmf`]) |
//! | FCM   | artifact degrees, exactly | Poisson-binomial ([`pmf::fcm_pmf`]) |
//! | SDSM  | both degree sequences, on average | Poisson-binomial ([`pmf::sdsm_pmf`]) |
//! | FDSM  | both degree sequences, exactly | Monte-Carlo ([`fdsm`]) |
//!
//! ```
//! use spine::bigraph::BipartiteGraph;
//! use spine::extract::{extract_backbone, Correction, Model, Tails, TestConfig};
//!
//! let g = BipartiteGraph::from_rows(&[
//!     vec![1, 1, 1, 0, 0, 0],
//!     vec![1, 1, 1, 0, 0, 0],
//!     vec![0, 0, 0, 1, 1, 1],
//!     vec![0, 0, 0, 1, 1, 1],
//! ]).unwrap();
//! let cfg = TestConfig::new(0.4, Tails::Two, Correction::None, Model::Frm).unwrap();
//! let backbone = extract_backbone(&g, &cfg).unwrap();
//! assert!(backbone.has_edge(0, 1));
//! assert!(!backbone.has_edge(0, 2));
//! ```

pub mod bigraph;
pub mod cellprob;
pub mod error;
pub mod eval;
pub mod extract;
pub mod fdsm;
pub mod oracle;
pub mod pmf;
pub mod rng;
pub mod synth;

mod linalg;

pub use bigraph::{Backbone, BipartiteGraph, Projection};
pub use error::{Error, Result};
