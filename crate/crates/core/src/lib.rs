#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod bergman;
pub mod cantor_bump;
pub mod dd;
pub mod domain;
pub mod error;
pub mod hartogs;
pub mod levi;
pub mod pipeline;
pub mod sampling;
pub mod witness;
pub mod real17;

pub use error::{Error, Result};
