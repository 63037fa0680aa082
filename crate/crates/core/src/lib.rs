//! Exact solution and two-site quantum correlations of the cluster-like spin chain
//!
//! H = -J Σ_i (σˣ_{i-1} σᶻ_i σˣ_{i+1} + B σᶻ_i)
//!
//! The chain maps onto free fermions. [`gfunction`] evaluates the single
//! fermionic contraction G_r, [`correlators`] turns it into spin correlators,
//! [`rdm`] assembles two-site states and [`qinfo`] measures them. [`ed`]
//! diagonalizes short chains directly as an independent reference.

pub mod analysis;
pub mod correlators;
pub mod det;
pub mod ed;
pub mod error;
pub mod gfunction;
pub mod model;
pub mod qinfo;
pub mod quadrature;
pub mod rdm;

pub use error::{Error, Result};
