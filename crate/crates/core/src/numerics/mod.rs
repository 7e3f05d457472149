//! Reference-element building blocks: Gauss–Legendre rules, Lagrange bases on
//! `[0, 1]` and a small dense LU solver.

mod lagrange;
mod linalg;
mod quadrature;

pub use lagrange::{lagrange_value, LagrangeBasis};
pub use linalg::{lu_solve, DenseMatrix};
pub use quadrature::{gauss_legendre, QuadratureRule};
