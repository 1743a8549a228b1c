//! Simulation and verification toolkit for self-reinforced preferential
//! attachment trees (SRPAT).
//!
//! A new vertex attaches to an existing vertex `i` with probability
//! proportional to `theta_t(i)`, the sum of the degrees of `i` over all
//! prior times. The crate provides
//!
//! * [`tree`] and [`sampler`]: the growth process with an `O(t)` reference
//!   sampler and an `O(1)` edge-age sampler,
//! * [`simulate`]: seeded replica runs with snapshot recording,
//! * [`pat`]: the classical affine preferential attachment tree, for
//!   comparison of growth exponents,
//! * [`determin`]: the deterministic mean recursion, its fixed points, the
//!   crossover time and Gamma-function bounds,
//! * [`sa`]: stochastic-approximation machinery and the pathwise ODE
//!   comparison bound,
//! * [`estimators`]: growth-exponent fits and summary statistics.

pub mod determin;
pub mod error;
pub mod estimators;
pub mod pat;
pub mod rng;
pub mod sa;
pub mod sampler;
pub mod simulate;
pub mod tree;

pub use error::{Error, Result};
pub use tree::{TreeState, Vertex};
