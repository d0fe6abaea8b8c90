//! Numerical toolkit for the water-wave dispersion symbol
//! `m_beta(xi) = sqrt(|xi| (1 + beta |xi|^2) tanh |xi|)`.
//!
//! The crate evaluates the symbol and its derivatives, builds smooth dyadic
//! frequency cutoffs, computes the frequency-localized dispersive kernel and
//! its decay in time, measures Strichartz-type space-time norms of the free
//! flow on a torus, and integrates the Whitham-Boussinesq system with a
//! pseudo-spectral scheme in its diagonal variables.
//!
//! ```
//! use dispersive_core::symbol::{eval_m, SymbolParams};
//!
//! let m = eval_m(SymbolParams::gravity(), 1.0).unwrap();
//! assert!((m - 1f64.tanh().sqrt()).abs() < 1e-15);
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod cli;
pub mod dyadic;
pub mod error;
mod jet;
pub mod kernel;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod strichartz;
pub mod symbol;

pub use error::{Error, Result};
