//! Verification toolkit for nonlinear semidefinite programs
//!
//! ```text
//! min f(x)  s.t.  F(x) ⪰ 0
//! ```
//!
//! The crate computes the variational geometry of the PSD cone (tangent and
//! normal cones, the second subderivative of its indicator function together
//! with a constructive oracle) and uses it to check a second-order sufficient
//! condition and quadratic growth at candidate points.
//!
//! Modules, bottom-up:
//!
//! - [`symmat`]: symmetric matrices, ordered eigenvalue decomposition `Y = PᵀMP`,
//!   pseudoinverse and eigenbasis blocks.
//! - [`cone`]: PSD membership, projection, distance, tangent and normal cones.
//! - [`subderivative`]: closed-form second subderivative, Schur-complement
//!   feasibility, recovery sequence and sampling oracle.
//! - [`nlsdp`]: quadratic problem model with exact derivatives and the
//!   generalized Lagrangian.
//! - [`sosc`]: critical cone, directional multipliers, SOSC margin, growth check.
//! - [`report`] and [`cli`]: JSON formats and the command-line front end.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod cone;
pub mod error;
pub mod nlsdp;
pub mod random;
pub mod report;
pub mod sosc;
pub mod subderivative;
pub mod symmat;

pub use error::{Error, Result};
pub use subderivative::ExtendedReal;
pub use symmat::{OrderedEigenDecomposition, SymMat};
