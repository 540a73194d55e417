//! Gradient-ratio bounds for Dirichlet and Neumann eigenfunctions of
//! `L = Δ + ∇V`, together with the numerical machinery to check them:
//! model domains, a Sturm–Liouville eigensolver, first-passage laws of
//! drifted Brownian motion, Monte-Carlo estimators and a report pipeline.

pub mod bounds;
pub mod domains;
pub mod eigensolver;
pub mod error;
pub mod exec;
pub mod fpt;
pub mod mc;
pub mod optimize;
pub mod quadrature;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
