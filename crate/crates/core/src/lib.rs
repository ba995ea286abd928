//! Pseudo-spectral simulation of the nonlocal parabolic equation
//!
//! ```text
//! ∂ₜu + (1/π) ∂ₓ arctan(Hu/u) = 0      on S = R/2πZ,
//! ```
//!
//! which governs the density of roots of a polynomial under repeated
//! differentiation. The solver integrates the δ-regularized system
//!
//! ```text
//! ∂ₜu + (1/π)(uΛu - (Hu)∂ₓu)/(δ + u² + (Hu)²) - δ∂ₓ²u = 0,   u(0) = e^{δ∂ₓ²}u₀,
//! ```
//!
//! and [`diagnostics`] measures the maximum principle, the Ḣ^{1/2} energy
//! budget, smoothing rates and L∞ stability on the resulting trajectories.
//! [`roots`] computes the same flow directly from polynomial roots.
//!
//! Modules, bottom-up: [`spectral`] (grids, FFTs, `H`, `Λ`, `∂ₓ`, heat,
//! Sobolev seminorms), [`dynamics`] (coefficients and tendencies),
//! [`solver`], [`diagnostics`], [`roots`], and [`cli`] (configuration,
//! CSV output, experiment drivers).

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod roots;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{PeriodicGrid, RealField, SpectralField};
