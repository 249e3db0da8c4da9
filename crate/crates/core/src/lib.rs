//! Numerical laboratory for three-term progressions whose common gap is
//! constrained in an ℓᵖ norm.
//!
//! The crate is organized bottom-up: [`lp_geometry`] supplies norms, ball
//! volumes and sphere quadratures; [`mollifier`] builds the smoothed sphere
//! measures; [`gowers`] computes U² and U³ norms on cyclic grids;
//! [`forms`] evaluates the discretized counting forms; [`oscillatory`]
//! studies the decay of the two-parameter oscillatory integral; and
//! [`sets`] generates test sets and searches them for progressions.

pub mod cutoff;
pub mod error;
pub mod export;
pub mod forms;
pub mod gowers;
pub mod lp_geometry;
pub mod mollifier;
pub mod oscillatory;
pub mod quadrature;
pub mod rng;
pub mod sets;
pub mod sum;

pub use error::{Error, Result};
pub use lp_geometry::{LpExponent, VecD};
