//! Exact genus averages of representation numbers for positive-definite
//! integral ternary quadratic forms.
//!
//! A lattice is given by its symmetric Gram matrix `A`, with quadratic form
//! `Q(x) = xᵀAx`. The library evaluates the Siegel–Weil genus average
//! `r(n, gen L)` as an exact rational number, built from Hurwitz class
//! numbers, local densities and Watson transformations.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod arith;
pub mod classnum;
pub mod engine;
pub mod error;
pub mod genusformula;
pub mod lattice;
pub mod localdensity;
pub mod oracle;
pub mod watson;

pub use arith::Rat;

pub use error::{Error, Result};

pub use lattice::{GramMatrix, LatticeProfile};
pub use engine::{Config, Engine};
pub use genusformula::{evaluate_genus_avg, synthesize_formula, GenusValue, HFormula, HTerm, PiecewiseFormula, Provenance};
pub use oracle::{count_representations, semi_oracle, VerificationReport};
