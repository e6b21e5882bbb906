//! Shift-orthogonal function toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: index geometry of coefficient tensors (depth and shift
//!   multi-indices, cyclic shifts, shift Gram matrices).
//! * [`btransform`]: the per-depth DFT over shift axes that block-diagonalises
//!   every shift-circulant structure.
//! * [`projection`]: the fast `O(M log ΠL)` projection onto the set of
//!   shift-orthogonal coefficient vectors, its deflated variant, and the
//!   membership/perpendicularity checkers.
//! * [`sopw`]: the shift orthogonal plane wave basis in 1D (Fourier tables,
//!   grid synthesis/analysis, derivative stencils, optimality certificate).
//! * [`cpw`]: split-Bregman solver for compressed plane waves built on the
//!   projection.
//! * [`io`], [`plot`], [`bench`]: file formats, SVG output and the scaling
//!   harness used by the command-line front end.
//!
//! Data-parallel loops go through [`Parallelism`]; with the `parallel`
//! feature disabled every loop runs sequentially and results are identical.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod bench;
pub mod btransform;
pub mod cpw;
mod error;
pub mod io;
pub mod lattice;
mod par;
pub mod plot;
pub mod projection;
pub mod sopw;

pub use error::{Error, Result};
pub use lattice::{CoeffTensor, LatticeDomain, MultiIndex};
pub use par::Parallelism;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
