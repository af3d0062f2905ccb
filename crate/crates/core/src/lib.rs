// Tabulated quadrature and Lanczos coefficients keep their published digits;
// guards of the form `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod error;
pub mod lab;
pub mod mellin;
pub mod moments;
pub mod quadrature;
pub mod rmt;
pub mod special;
pub mod table;
pub mod tauberian;

pub use error::{Error, Provenance, Result};
pub use lab::Lab;
pub use special::ComplexValue;
