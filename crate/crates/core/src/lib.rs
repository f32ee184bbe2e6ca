#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Thomas-Fermi and semiclassical trial-state toolkit for relativistic
//! (Brown-Ravenhall) atoms.

pub mod bounds;
pub mod coherent;
pub mod corrections;
pub mod error;
pub mod grid;
pub mod hole;
pub mod model;
pub mod packets;
pub mod profile;
pub mod smear;
pub mod quad;
pub mod tf;

pub use error::{Error, Result};
