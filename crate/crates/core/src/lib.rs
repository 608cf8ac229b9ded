//! Occupation-measure relaxations of variational and optimal-control
//! problems at desk scale: discretized linear-programming relaxation,
//! quantile sheet decomposition of feasible measures, classical-minimizer
//! recovery in codimension one, and a two-dimensional counterexample where
//! the classical and relaxed values provably differ.

pub mod domain;
pub mod basis;
pub mod expr;
pub mod field;
pub mod gapx;
pub mod grid;
pub mod lp;
pub mod measure;
pub mod problem;
pub mod relax;
pub mod sheets;

pub use domain::{BoundaryNode, Domain, DomainError};
pub use field::ScalarField;
pub use problem::VariationalProblem;
