#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod fock;
pub mod metrology;
pub mod scenarios;
pub mod special_fn;

pub use error::{DqsError, Result};
