//! Subgraph generated random graph models: sampling, exact expected
//! adjacency matrices, spectral concentration bounds, and network
//! centrality analysis.
//!
//! A model is a list of subgraph types. Each type pairs a small template
//! (link, triangle, clique, or an arbitrary labelled subgraph) with a
//! probability rule, and every placement of the template on the n labelled
//! nodes realizes independently. The weighted adjacency matrix counts how
//! many realized placements cover each node pair; the unweighted variant
//! clamps those multiplicities to one.
//!
//! Modules:
//! - [`model`]: templates, probability rules, specs, and validation
//! - [`sampler`]: Monte Carlo realization of a spec
//! - [`expectation`]: exact expected adjacency matrices
//! - [`linalg`]: dense symmetric matrix kernels
//! - [`centrality`]: degree / eigenvector / Katz measures and two
//!   network-game solvers built on them
//! - [`bounds`]: closed-form spectral deviation bounds and assumption checks
//! - [`enumeration`]: small-model brute-force oracle for the variance-proxy
//!   machinery behind the bounds
//! - [`sweep`]: error-versus-size experiments, CSV and SVG emission

pub mod bounds;
pub mod centrality;
pub mod combinatorics;
pub mod enumeration;
pub mod expectation;
pub mod linalg;
pub mod model;
pub mod sampler;
pub mod sweep;

mod par;
