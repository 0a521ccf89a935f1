//! Causal polytopes of bipartite correlations and their violation by
//! process-matrix correlations.
//!
//! * [`linalg`]: dense complex matrices, partial traces and the
//!   replace-with-identity map on tensor-product spaces.
//! * [`polytope`]: exact vertex and facet enumeration of causal polytopes,
//!   symmetry classes and causal bounds.
//! * [`process`]: process matrices, instruments and the probability rule.
//! * [`sdp`]: an ADMM solver for the semidefinite subproblems.
//! * [`seesaw`]: alternating maximization of inequality violations and the
//!   signaling-plane boundary scan.

pub mod error;
pub mod linalg;
pub mod numfmt;
pub mod polytope;
pub mod process;
pub mod sdp;
pub mod seesaw;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
