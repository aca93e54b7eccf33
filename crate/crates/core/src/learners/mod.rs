//! Imitation learners over tabular MDPs with an exact RL oracle.

mod apprenticeship;
mod bc;
mod dagger;
mod gail;

pub use apprenticeship::{
    expert_feature_expectation, feature_expectation, fem_train, mwal_shortfall_envelope, mwal_train,
    ApprenticeshipConfig,
};
pub use bc::{bc_01_loss, bc_fit, bc_negative_log_likelihood};
pub use dagger::{dagger_train, DaggerConfig, DaggerInit};
pub use gail::{gail_train, GailConfig};

use serde::{Deserialize, Serialize};

use crate::mdp::{OccupancyMeasure, TabularPolicy};
use crate::scalar::Scalar;

/// Outcome of a training run.
///
/// `objective_trace[i]` is the learner's distance-to-target after iteration
/// `i + 1`. For the game-based learners `duality_gap` certifies the final
/// iterate and `epsilon_achieved` is the final objective minus the
/// best-response lower bound on its infimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrainingReport<T> {
    pub algorithm: String,
    pub final_policy: TabularPolicy<T>,
    pub objective_trace: Vec<T>,
    pub duality_gap: T,
    pub converged: bool,
    pub epsilon_achieved: T,
    pub seed: u64,
    /// Occupancy of `final_policy` when the learner tracks it (mixture learners).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupancy: Option<OccupancyMeasure<T>>,
}

impl<T: Scalar> TrainingReport<T> {
    pub fn iterations(&self) -> usize {
        self.objective_trace.len()
    }
}
