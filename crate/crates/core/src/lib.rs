//! Divisor sums over reducible binary quartic forms `L1 * L2 * Q`.
//!
//! The crate computes congruence counts, local densities, Euler-product
//! constants, region and polytope volumes, and exhaustive divisor sums, and
//! checks the predicted asymptotics against them.

pub mod arith;
pub mod densities;
pub mod error;
pub mod forms;
pub mod fixtures;
pub mod geometry;
pub mod lattice;
pub mod rational;
pub mod sums;
pub mod verify;

pub use error::{Error, Hypothesis, Result};
