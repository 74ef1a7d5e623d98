//! Digit sums in two multiplicatively independent bases, and the integers
//! whose two digit sums stand in a prescribed ratio.

// `!(x > 0.0)` style guards are there to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod construction;
pub mod digits;
pub mod diophantine;
pub mod error;
pub mod exponents;
pub mod hp;
pub mod optimize;
pub mod scan;
pub mod verify;
pub mod weyl;

pub use error::{Error, Result};
