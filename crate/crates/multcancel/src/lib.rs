//! Numerical checks relating multiplier cancellation on the
//! antidiagonal to vanishing moments of multilinear operator output.
//!
//! The crate is organized bottom-up: centered lattices and FFT
//! quadrature ([`grid`]), symbol expression trees with exact
//! differentiation and the cancellation/decay checkers ([`symbols`]),
//! compactly supported atoms with certified moments ([`atoms`]), the
//! operator itself ([`multiplier`]), the moment-identity and
//! equivalence harnesses ([`verify`]), and the command-line front end
//! ([`cli`]).

pub mod atoms;
pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod multiplier;
pub mod report;
pub mod symbols;
pub mod util;
pub mod verify;

pub use cli::cli_main;
pub use error::{Error, Result};
