//! Exact-exponent Dirichlet series: Bohr bases, equivalence under phase
//! twists, value sets, and zero location.

pub mod basis;
pub mod equivalence;
pub mod error;
pub mod eval;
pub mod lattice;
pub mod scenarios;
pub mod series;
pub mod valuesets;
pub mod zeros;

pub use error::{Error, Result};
pub use series::{Complex, ExponentVector, Rational, SeriesSpec, Symbol, SymbolTable, TailMajorant, Term};
