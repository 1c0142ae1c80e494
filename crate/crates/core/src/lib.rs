//! Maximal distance-power energies of convex bodies, stable-law moment
//! identities and spherical embeddings of snowflaked metrics.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bodies;
pub mod discrete_energy;
pub mod embedding;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod points;
pub mod rng;
pub mod specfun;
pub mod stable;

pub use error::{Error, Result};
