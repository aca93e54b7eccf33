//! Exact tabular imitation learning.
//!
//! The crate computes discounted occupancy measures and policy values in
//! closed form, trains behavioral cloning, DAgger, adversarial occupancy
//! matching (GAIL with explicit discriminator classes), projection
//! apprenticeship learning and multiplicative-weights apprenticeship
//! learning, and evaluates both sides of the discrepancy-propagation
//! inequalities that relate one-step policy error, occupancy error and value
//! error.
//!
//! Every numeric routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! tolerances in the bound checks are calibrated for.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod divergences;
pub mod error;
pub mod learners;
pub mod linalg;
pub mod mdp;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Mdp = mdp::TabularMdp<f64>;
pub type Policy = mdp::TabularPolicy<f64>;
pub type Occupancy = mdp::OccupancyMeasure<f64>;
pub type Trajectory = mdp::Trajectory<f64>;
pub type DiscriminatorClass = divergences::DiscriminatorClass<f64>;
pub type TrainingReport = learners::TrainingReport<f64>;
pub type BoundReport = bounds::BoundReport<f64>;

pub type Mdp32 = mdp::TabularMdp<f32>;
pub type Policy32 = mdp::TabularPolicy<f32>;
