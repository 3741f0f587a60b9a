//! Solitary waves of the abcd Boussinesq traveling-wave system.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod analysis;
pub mod continuation;
pub mod discretize;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod par;
pub mod solver;
pub mod verify;
