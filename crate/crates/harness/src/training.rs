//! One dispatcher from [`Algorithm`] to the core learners.

use ilgap_core::divergences::{discounted_empirical_occupancy, DemoSet, DiscriminatorClass, FeatureTable};
use ilgap_core::learners::{
    bc_fit, dagger_train, fem_train, gail_train, mwal_train, ApprenticeshipConfig, DaggerConfig, DaggerInit, GailConfig,
};
use ilgap_core::mdp::{sample_trajectories, TabularMdp};
use ilgap_core::{Policy, TrainingReport, Trajectory};

use crate::config::{Algorithm, LearnerSettings};
use crate::error::Result;

/// Expert demonstrations shared by every learner of one sweep cell.
pub struct Demonstrations {
    pub trajectories: Vec<Trajectory>,
    /// Every (state, action) pair of the trajectories.
    pub pairs: DemoSet,
    /// Discounted empirical occupancy of the trajectories.
    pub occupancy: Vec<f64>,
}

impl Demonstrations {
    /// `m` expert trajectories of length `horizon` from stream `seed`. For a
    /// fixed seed the sample for `m` is a prefix of the sample for any larger `m`.
    pub fn sample(mdp: &TabularMdp<f64>, expert: &Policy, m: usize, horizon: usize, seed: u64) -> Result<Self> {
        let trajectories = sample_trajectories(mdp, expert, horizon, m, seed)?;
        let pairs = DemoSet::from_trajectories(&trajectories, seed)?;
        let occupancy = discounted_empirical_occupancy(&trajectories, mdp.gamma(), mdp.n_states(), mdp.n_actions())?;
        Ok(Self { trajectories, pairs, occupancy })
    }

    pub fn m(&self) -> usize {
        self.trajectories.len()
    }
}

pub struct Trained {
    pub policy: Policy,
    /// Full report for the iterative learners; `None` for BC and the expert.
    pub report: Option<TrainingReport>,
}

pub fn complete_class(settings: &LearnerSettings) -> Result<DiscriminatorClass<f64>> {
    Ok(DiscriminatorClass::complete(settings.gail.delta_bound)?)
}

pub fn gail_config(settings: &LearnerSettings) -> Result<GailConfig<f64>> {
    let mut config = GailConfig::new(complete_class(settings)?, settings.gail.iterations);
    config.gap_tolerance = settings.gail.gap_tolerance;
    Ok(config)
}

/// Trains `algorithm` on `demos`. DAgger runs one iteration per demonstration
/// trajectory, starting from the expert's labels, so its label budget matches.
pub fn train(
    algorithm: Algorithm,
    mdp: &TabularMdp<f64>,
    expert: &Policy,
    demos: &Demonstrations,
    settings: &LearnerSettings,
    horizon: usize,
    seed: u64,
) -> Result<Trained> {
    let (n, k) = (mdp.n_states(), mdp.n_actions());
    let from_report = |r: TrainingReport| Trained { policy: r.final_policy.clone(), report: Some(r) };
    Ok(match algorithm {
        Algorithm::Expert => Trained { policy: expert.clone(), report: None },
        Algorithm::Bc => Trained { policy: bc_fit::<f64>(&demos.pairs, n, k)?, report: None },
        Algorithm::Dagger => {
            let config = DaggerConfig {
                iterations: demos.m(),
                rollouts_per_iter: settings.dagger.rollouts_per_iteration,
                horizon,
                init: DaggerInit::Expert,
            };
            from_report(dagger_train(mdp, expert, &config, seed)?)
        }
        Algorithm::Gail => from_report(gail_train(mdp, &demos.occupancy, &gail_config(settings)?, seed)?),
        Algorithm::Fem | Algorithm::Mwal => {
            let features = FeatureTable::state_action_indicators(n, k);
            let target = features.expectation(&demos.occupancy);
            let config = ApprenticeshipConfig::new(settings.apprenticeship.iterations);
            let report = if algorithm == Algorithm::Fem {
                fem_train(mdp, &target, &features, &config)?
            } else {
                mwal_train(mdp, &target, &features, &config)?
            };
            from_report(report)
        }
    })
}
