//! Operator-monotone geometry of finite-dimensional quantum channels:
//! `J_{f,σ}` operators, χ²_f divergences and their input-dependent contraction
//! coefficients, maximal correlation coefficients, recovery maps and
//! mixing-time bounds.

pub mod channel;
pub mod cli;
pub mod contraction;
pub mod correlation;
pub mod divergences;
pub mod io;
pub mod error;
pub mod jop;
pub mod linalg;
pub mod maps;
pub mod monotone;
pub mod random;
pub mod state;
pub mod suites;
pub mod tolerances;

pub use error::{Error, Result};
