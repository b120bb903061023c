//! Weight-3 parity "modulation" codes `C_m`, their belief-propagation
//! decoder, the analytical BER machinery around it, and a multilevel scheme
//! that protects sub-blocks of the information word with polar codes.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bp;
pub mod channel;
pub mod error;
pub mod harness;
pub mod modcode;
pub mod multilevel;
pub mod numerics;
pub mod polar;

pub use error::{Error, Result};
