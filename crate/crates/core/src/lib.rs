//! Heat-semigroup machinery for junta analysis on product-like spaces.
//!
//! The crate builds finite reversible Markov spaces (biased cubes, tori,
//! slices, symmetric groups) and discretized log-concave line measures,
//! attaches their generators and semigroups, and verifies the functional
//! inequalities that drive low-influence junta extraction: spectral gaps,
//! log-Sobolev constants, hypercontractivity, short-time and low-influence
//! error bounds, and the geometric-influence versions on continuous
//! products. Every extractor returns a certificate with the realized
//! schedule and a measured error.

pub mod continuous;
pub mod error;
pub mod functions;
pub mod influence;
pub mod junta;
pub mod linalg;
pub mod report;
pub mod semigroup;
pub mod slice;
pub mod spaces;
pub mod tolerances;

pub use error::{Error, Result};
