//! Numerical tools for degenerate reaction-diffusion equations with
//! spatially periodic coefficients.

// Checks are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod demos;
pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod renorm;
pub mod solver;
pub mod waves;

pub use error::{Error, Result};
pub use model::{DiffusionLaw, ProblemSpec, Reaction, ReactionKind};
