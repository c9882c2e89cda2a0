//! Exact computations with derived de Rham complexes of polynomial algebras.

pub mod complex;
pub mod derham;
pub mod dg;
pub mod error;
pub mod gca;
pub mod groebner;
pub mod linalg;
pub mod parse;
pub mod poly;
pub mod reiffen;
pub mod witness;

pub use error::Error;
pub use poly::{Monomial, Poly, Rational, VarContext};
