// NaN must fail every positivity and tolerance check, so comparisons are
// written negated on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod embedsolve;
pub mod error;
pub mod intrinsic;
pub mod jets;
pub mod matmap;
pub mod surfaces;
pub mod symfun;

pub use error::{Error, Result};
