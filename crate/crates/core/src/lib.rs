//! Heat, stable and wave semigroups on the homogeneous tree of degree `q + 1`
//! (`q = 1` is ℤ): radial kernels, operator application, truncated maximal
//! functions, weight admissibility and a numerical verification suite.
//!
//! Vertices are words `o.i1.i2...` over the root `o`; every kernel is radial
//! and stored as its profile `k ↦ K_t(k)`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod geometry;
pub mod special;
pub mod kernels;
pub mod operators;
pub mod weights;
pub mod flow;
pub mod verify;
pub mod cli;

pub use error::{Error, Result};
