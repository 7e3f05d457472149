//! Continuous Galerkin time integration of first-order ODE systems with
//! standard and symmetry-preserving (invariantized) weak forms.

pub mod error;
pub mod experiments;
pub mod galerkin;
pub mod group;
pub mod invariance;
pub mod numerics;
pub mod schemes;

pub use error::{Error, Result};
