//! Outer polyhedral approximation of convex vector optimization problems by
//! l_p norm-minimization scalarization, with the tooling needed to measure
//! and verify its convergence behaviour.

pub mod analysis;
pub mod driver;
pub mod error;
pub mod lp_geometry;
pub mod polytope;
pub mod problems;
pub mod scalarization;

pub use error::{Error, Result};
