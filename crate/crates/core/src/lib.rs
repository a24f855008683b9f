// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calendar;
pub mod curves;
pub mod econometrics;
pub mod error;
pub mod instruments;
pub mod pipeline;
pub mod series;

pub use error::{Error, Result};
