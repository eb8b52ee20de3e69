//! Beta-negative binomial process family.
//!
//! Simulation of completely random measures (beta, three-parameter beta,
//! reparameterized beta, gamma, beta prime, Dirichlet), likelihood processes
//! over them, exact conjugate updates, expected-count asymptotics with
//! Monte-Carlo growth experiments, and Gibbs samplers for the hierarchical
//! beta-negative binomial admixture model.

// Negated comparisons such as `!(x > 0.0)` are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod commands;
pub mod conjugacy;
pub mod corpus;
pub mod counts;
pub mod crm;
pub mod error;
pub mod hbnbp;
pub mod measure;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
