use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::divergences::{expected_policy_tv, DemoPair, DemoSet};
use crate::error::{Error, Result};
use crate::mdp::{sample::rollout, TabularMdp, TabularPolicy};
use crate::scalar::Scalar;

use super::{bc_fit, TrainingReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DaggerInit {
    /// The first batch is collected by the expert itself.
    #[default]
    Expert,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaggerConfig {
    pub iterations: usize,
    pub rollouts_per_iter: usize,
    pub horizon: usize,
    #[serde(default)]
    pub init: DaggerInit,
}

/// Dataset aggregation: each iteration rolls out the current policy, labels
/// every visited state with the expert's greedy action, appends the labels to
/// the dataset and refits by behavioral cloning. Returns the final policy.
///
/// The trace holds `E_{d_expert}[TV(pi_i, expert)]` after each refit.
pub fn dagger_train<T: Scalar>(
    mdp: &TabularMdp<T>,
    expert: &TabularPolicy<T>,
    config: &DaggerConfig,
    seed: u64,
) -> Result<TrainingReport<T>> {
    expert.check_shape(mdp.n_states(), mdp.n_actions())?;
    if config.iterations == 0 || config.rollouts_per_iter == 0 || config.horizon == 0 {
        return Err(Error::InvalidParameter("DAgger needs iterations, rollouts and horizon >= 1".into()));
    }
    let (n, k) = (mdp.n_states(), mdp.n_actions());
    let labels = expert.greedy_actions();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = match config.init {
        DaggerInit::Expert => expert.clone(),
        DaggerInit::Uniform => TabularPolicy::uniform(n, k),
    };
    let mut pairs = Vec::new();
    let mut trace = Vec::with_capacity(config.iterations);
    let mut trajectory_id = 0;
    for _ in 0..config.iterations {
        for _ in 0..config.rollouts_per_iter {
            let traj = rollout(mdp, &current, config.horizon, &mut rng);
            pairs.extend(traj.steps.iter().map(|st| DemoPair { state: st.state, action: labels[st.state], trajectory_id }));
            trajectory_id += 1;
        }
        let data = DemoSet::new(pairs.clone(), trajectory_id, seed)?;
        current = bc_fit(&data, n, k)?;
        trace.push(expected_policy_tv(mdp, expert, &current)?);
    }
    let last = *trace.last().expect("at least one iteration");
    Ok(TrainingReport {
        algorithm: "dagger".into(),
        final_policy: current,
        objective_trace: trace,
        duality_gap: last,
        converged: true,
        epsilon_achieved: last,
        seed,
        occupancy: None,
    })
}
