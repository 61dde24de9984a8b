//! Pseudo-spectral simulation and Bourgain-norm verification tools for
//! coupled Korteweg–de Vries systems.

pub mod bourgain;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod io;
pub mod mat2;
pub mod quadrature;
pub mod solver;
pub mod systems;
pub mod transforms;

pub use error::{Error, Result};
