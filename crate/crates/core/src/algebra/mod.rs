//! Exact arithmetic for graded differential polynomials.

pub mod poly;
pub mod rational;
pub mod superpoly;

pub use poly::{JetVar, Monomial, Poly};
pub use rational::RationalExpr;
pub use superpoly::{canonical_word, Factor, Names, NonlocalVar, SuperPoly, Var, Word};
