//! Spatial two-photon amplitude of collinear, frequency-degenerate type-I
//! down-conversion in stacks of birefringent slabs with pump walk-off.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod output;
pub mod quadrature;
pub mod scenario;
pub mod tpa;

pub use error::{Error, Result};
pub use exec::Execution;
