//! Certified enclosures of the first nonzero Steklov eigenvalue of regular polygons.

// `!(a < b)` is used on purpose: it also rejects NaN endpoints.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod interval;
pub mod weights;
pub mod blocks;
pub mod tails;
pub mod certify;
pub mod report;
pub mod schur;
pub mod constants;

pub use error::{Error, Result};
pub use interval::{arith, gamma_enclosure, zeta_enclosure, ArithOp, Dir, Endpoint, Interval, Mp, Precision};

/// Multiple-precision interval, the default scalar of every certified pipeline.
pub type MpInterval = Interval<Mp>;
pub type F64Interval = Interval<f64>;
pub type F32Interval = Interval<f32>;
