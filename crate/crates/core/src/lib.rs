//! Completely bounded idempotent projections onto fixed-point subspaces of
//! semigroup actions on matrix spaces.

pub mod actions;
pub mod apps;
pub mod averaging;
pub mod cbnorm;
pub mod error;
pub mod fixedpoints;
pub mod linalg;
pub mod sdp;
pub mod superop;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use superop::SuperOp;
