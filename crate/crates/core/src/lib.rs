#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dyson;
pub mod error;
pub mod matrix;
pub mod metric;
pub mod perturbation;
pub mod spectra;
pub mod stability;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
