//! NaN-rejecting checks are written as `!(x >= floor)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod divergence;
pub mod equality;
pub mod error;
pub mod linalg;
pub mod modular;
pub mod quadrature;
pub mod quantum;
pub mod random;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use quantum::{DensityMatrix, KrausChannel};
