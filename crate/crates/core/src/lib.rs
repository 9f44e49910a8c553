//! Decide whether weakly nonlocal operators are Hamiltonian.
//!
//! Operators are encoded as superfunctions in odd variables `p_i` plus formal
//! nonlocal odd variables `r` with `r_x = z^j p_j`. The variational Schouten
//! bracket of the encoding is computed exactly and its Euler–Lagrange tuple
//! tested for zero.

pub mod algebra;
pub mod error;
pub mod jetcalc;
pub mod nonlocal;
pub mod schouten;
pub mod geometry;
pub mod dsl;
pub mod report;
pub mod commands;

pub use algebra::{Factor, JetVar, Names, NonlocalVar, Poly, RationalExpr, SuperPoly};
pub use error::{AlgebraError, GeometryError, NonlocalError};
