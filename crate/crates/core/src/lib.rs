//! Conditional Gaussian-state dynamics for two continuously monitored open
//! quantum systems, and the classicality criteria evaluated on them.
//!
//! The two models are
//!
//! * an underdamped harmonic oscillator in a thermal bath (rotating-wave
//!   approximation), monitored by homodyne/heterodyne detection of its
//!   emitted phonons ([`oscillator`]), and
//! * a free particle in high-temperature quantum Brownian motion, monitored
//!   through the Lindblad operator of its bath ([`qbm`]).
//!
//! In both cases the conditional state stays Gaussian and its second moments
//! evolve deterministically, so every criterion in [`criteria`] is a function
//! of the quadratic-form coefficients in [`gaussian::GaussianShape`] alone.

// `!(x >= 0.0)` style guards reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod error;
pub mod gaussian;
pub mod numerics;
pub mod oscillator;
pub mod outcome;
pub mod qbm;

pub use error::{Error, Result};
pub use gaussian::{GaussianShape, Moments, Physicality};
pub use outcome::CriterionOutcome;
