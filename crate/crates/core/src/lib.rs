//! Unitary equivalence of lowest-dimensional reproducing formulae of type E₂ ⊂ Sp(2,ℝ):
//! group actions, intertwining operators, Shannon lifts and numerical verification.

pub mod cli;
pub mod config;
pub mod error;
pub mod function;
pub mod group;
pub mod intertwine;
pub mod shannon;
pub mod suite;
pub mod verify;

pub use error::{Error, Result};
