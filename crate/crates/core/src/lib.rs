//! Class groups of imaginary quadratic orders, effective class number bounds,
//! finite models of ring class field Galois groups, singular moduli and an exact
//! special-point sieve for plane curves in `Y(1)^2`.

pub mod abelian;
pub mod arith;
pub mod bigfloat;
pub mod bound_pipeline;
pub mod dirichlet;
pub mod error;
pub mod galois_models;
pub mod hilbert;
pub mod poly;
pub mod quadform;
pub mod sieve;

pub use error::{Error, Result};
