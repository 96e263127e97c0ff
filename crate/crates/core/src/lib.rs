//! Nearest-neighbor contingency table (NNCT) tests of spatial segregation
//! and association for two-class point patterns.
//!
//! The pipeline: build a [`pattern::MarkedPattern`], derive its
//! [`nngraph::NnDigraph`] (nearest neighbors plus the Q and R structure
//! statistics), tabulate the [`table::Nnct`], and evaluate the cell-specific
//! and directional statistics in [`stats`] with p-values from [`inference`].
//! [`second_order`] adds Ripley L-function comparisons at larger scales and
//! [`sim`] reproduces the empirical size/power experiments.
//!
//! ```
//! use nnct::pattern::{gen_segregation, SegParams};
//! use nnct::nngraph::NnDigraph;
//! use nnct::table::Nnct;
//! use nnct::stats::{z_two};
//!
//! let pattern = gen_segregation(50, 50, SegParams::new(0.25).unwrap(), 7).unwrap();
//! let graph = NnDigraph::build(&pattern).unwrap();
//! let table = Nnct::from_pattern(&pattern, &graph).unwrap();
//! let z = z_two(&table, graph.q() as f64, graph.r() as f64).unwrap();
//! assert!(z > 0.0); // diagonal excess under segregation
//! ```

pub mod error;
pub mod inference;
mod kdtree;
pub mod moments;
pub mod nngraph;
pub mod pattern;
pub mod rng;
pub mod second_order;
pub mod sim;
pub mod stats;
pub mod table;

pub use error::{Error, Result};
