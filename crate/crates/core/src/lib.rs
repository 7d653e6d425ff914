//! Link budgets, repeater distribution times and memory-assisted QKD key
//! rates for satellite quantum links.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod maqkd;
pub mod repeater;
pub mod scenario;

pub use error::{Error, Result};
