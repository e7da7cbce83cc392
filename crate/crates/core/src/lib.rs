//! Exact intersection theory for the blow-up of projective three-space along
//! a twisted quartic: surface Zariski decompositions, divisor volumes,
//! Abban–Zhuang flag invariants and the discriminant analysis of the quartic
//! family.

#![allow(clippy::result_large_err, clippy::needless_range_loop)]

pub mod curve;
pub mod error;
pub mod exact;
pub mod flag;
pub mod lattice;
mod linalg;
pub mod threefold;

pub use error::{Error, Result};
