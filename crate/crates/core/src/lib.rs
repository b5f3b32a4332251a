//! Frobenius difference modules over F_q(s,t): finite-field towers, truncated
//! fundamental matrices, Galois-group witnesses at places, and SL_n generation
//! certificates.

pub mod error;
pub mod function_field;
pub mod gf;
pub mod group;
pub mod json;
pub mod module;
pub mod nori;
pub mod pipeline;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
