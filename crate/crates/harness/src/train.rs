//! Single training run with the deterministic checks on the learned policy.

use ilgap_core::bounds::{
    check_eq14, check_lemma1, check_lemma2, check_lemma3, check_pinsker, check_theorem1, check_theorem1_kl,
    check_theorem3,
};
use ilgap_core::mdp::{derive_seed, occupancy, optimal_policy, policy_value_exact, FlatMdp, DEFAULT_RL_TOL};
use ilgap_core::{BoundReport, Policy, TrainingReport};
use serde::{Deserialize, Serialize};

use crate::config::{build_environment, Algorithm, EnvDumpConfig, TrainConfig};
use crate::error::{HarnessError, Result};
use crate::training::{train, Demonstrations};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub config: TrainConfig,
    pub algorithm: Algorithm,
    pub expert_value: f64,
    pub learner_value: f64,
    pub value_gap: f64,
    pub policy: Policy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<TrainingReport>,
    /// Deterministic bounds evaluated on (expert, learned policy).
    pub bounds: Vec<BoundReport>,
}

impl TrainOutcome {
    /// `Err` with exit code 3 when a deterministic bound failed.
    pub fn check(&self) -> Result<()> {
        let failed: Vec<&BoundReport> = self.bounds.iter().filter(|r| !r.holds).collect();
        match failed.first() {
            None => Ok(()),
            Some(r) => Err(HarnessError::Violation {
                count: failed.len(),
                first: format!("{} lhs {} rhs {}", r.bound_id, r.lhs, r.rhs),
            }),
        }
    }
}

pub fn run_train(config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let env = &config.environment;
    let mdp = build_environment(env, env.gamma)?;
    let expert = optimal_policy(&mdp, DEFAULT_RL_TOL)?;
    let stream = derive_seed(config.seed, 0);
    let demos = Demonstrations::sample(&mdp, &expert, config.m, config.horizon, stream)?;
    let trained = train(config.algorithm, &mdp, &expert, &demos, &config.learners, config.horizon, stream)?;
    let pi = trained.policy;
    let expert_value = policy_value_exact(&mdp, &expert)?;
    let learner_value = policy_value_exact(&mdp, &pi)?;
    let p = occupancy(&mdp, &pi)?;
    let q = occupancy(&mdp, &expert)?;
    let bounds = vec![
        check_lemma1(&mdp, &expert, &pi)?,
        check_lemma2(&mdp, &expert, &pi)?,
        check_lemma3(&mdp, &expert, &pi)?,
        check_theorem1(&mdp, &expert, &pi)?,
        check_theorem1_kl(&mdp, &expert, &pi)?,
        check_theorem3(&mdp, &expert, &pi)?,
        check_eq14(p.state_action_dist(), q.state_action_dist())?,
        check_pinsker(p.state_action_dist(), q.state_action_dist())?,
    ];
    Ok(TrainOutcome {
        config: config.clone(),
        algorithm: config.algorithm,
        expert_value,
        learner_value,
        value_gap: (learner_value - expert_value).abs(),
        policy: pi,
        report: trained.report,
        bounds,
    })
}

/// The configured environment in the flat tensor format.
pub fn dump_environment(config: &EnvDumpConfig) -> Result<FlatMdp<f64>> {
    config.validate()?;
    let env = &config.environment;
    Ok(build_environment(env, env.gamma)?.to_flat())
}
