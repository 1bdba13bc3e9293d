//! Support varifold machines.
//!
//! Shapes (triangle meshes, polyline graphs) are represented as discrete
//! oriented varifolds, i.e. weighted Dirac measures on ℝⁿ×Sⁿ⁻¹, and learning
//! happens over affine functionals `μ ↦ ⟨μ, h_θ⟩ + β` where `h_θ` is a small
//! sigmoid MLP evaluated on the Dirac supports.
//!
//! Module map:
//! - [`mesh`]: geometric inputs, generators and perturbations.
//! - [`so3`]: rotation utilities used by the alignment experiments.
//! - [`varifold`]: the measure representation, pairings, marginals and small
//!   optimal-transport oracles.
//! - [`model`]: the test-function MLP, the affine head, losses and checkpoints.
//! - [`train`]: Adam, datasets, training loops, metrics and robustness studies.

pub mod error;
pub mod mesh;
pub mod model;
pub mod so3;
pub mod train;
pub mod varifold;

pub use error::{Error, Result};
