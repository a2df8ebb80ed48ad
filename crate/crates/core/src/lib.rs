//! Quaternion matrix algebra and a variation-of-constants solver for linear
//! systems `x' = A(t) x + f(t)` with quaternion-valued unknowns.

// `!(a < b)` is used on purpose to reject NaN along with out-of-order values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod ode;
pub mod quat;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{QMatrix, QVector};
pub use quat::Quaternion;
