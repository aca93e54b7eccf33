//! Adversarial occupancy matching against an explicit discriminator class.
//!
//! The learner solves `min_pi sup_{D in class} E_{rho_expert}[D] - E_{rho_pi}[D]`
//! as a zero-sum game in occupancy space. The policy player always plays an
//! exact RL best response to the reward `r = D`; the discriminator either
//! best-responds to the running average occupancy (complete class) or takes
//! projected gradient-ascent steps on its weights (linear class). The returned
//! policy is extracted from the best averaged occupancy seen so far; the trace
//! records that iterate's objective, and the reported duality gap certifies it
//! against the best averaged-discriminator lower bound.

use serde::{Deserialize, Serialize};

use crate::divergences::{dot, neural_net_distance, norm2, DiscriminatorClass};
use crate::error::{Error, Result};
use crate::mdp::solve::best_response_with_values;
use crate::mdp::{occupancy, OccupancyMeasure, TabularMdp, TabularPolicy};
use crate::scalar::{kahan_sum, Scalar};

use super::TrainingReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GailConfig<T> {
    pub dclass: DiscriminatorClass<T>,
    pub outer_iterations: usize,
    /// Projected-ascent step for the linear class; unused by the complete class.
    pub discriminator_step_size: T,
    pub rl_oracle_tol: T,
    pub gap_tolerance: T,
}

impl<T: Scalar> GailConfig<T> {
    pub fn new(dclass: DiscriminatorClass<T>, outer_iterations: usize) -> Self {
        Self {
            dclass,
            outer_iterations,
            discriminator_step_size: T::one(),
            rl_oracle_tol: T::lit(crate::mdp::DEFAULT_RL_TOL),
            gap_tolerance: T::lit(1e-3),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.outer_iterations == 0 {
            return Err(Error::InvalidParameter("outer_iterations must be at least 1".into()));
        }
        for (name, v) in [
            ("discriminator_step_size", self.discriminator_step_size),
            ("rl_oracle_tol", self.rl_oracle_tol),
            ("gap_tolerance", self.gap_tolerance),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `max_pi E_{rho_pi}[reward]` and a maximizing policy.
fn max_expected_reward<T: Scalar>(mdp: &TabularMdp<T>, reward: &[T], tol: T) -> Result<(TabularPolicy<T>, T)> {
    let (pi, v) = best_response_with_values(mdp, reward, tol)?;
    let value = kahan_sum(mdp.init_dist().iter().zip(&v).map(|(&d, &x)| d * x));
    Ok((pi, (T::one() - mdp.gamma()) * value))
}

fn average<T: Scalar>(sum: &[T], count: usize) -> Vec<T> {
    let c = T::from_count(count);
    sum.iter().map(|&x| x / c).collect()
}

fn add_into<T: Scalar>(acc: &mut [T], xs: &[T]) {
    for (a, &x) in acc.iter_mut().zip(xs) {
        *a = *a + x;
    }
}

fn project_to_ball<T: Scalar>(w: &mut [T], radius: T) {
    let norm = norm2(w);
    if norm > radius {
        for x in w.iter_mut() {
            *x = *x * radius / norm;
        }
    }
}

/// Trains against the expert state-action distribution `expert_empirical`
/// (flattened `[s][a]`). The reward table of `mdp` is ignored.
pub fn gail_train<T: Scalar>(
    mdp: &TabularMdp<T>,
    expert_empirical: &[T],
    config: &GailConfig<T>,
    seed: u64,
) -> Result<TrainingReport<T>> {
    config.validate()?;
    let (n, k) = (mdp.n_states(), mdp.n_actions());
    if expert_empirical.len() != n * k {
        return Err(Error::DimensionMismatch(format!(
            "expert distribution has {} entries, expected {}",
            expert_empirical.len(),
            n * k
        )));
    }
    // validates normalization and grid compatibility
    neural_net_distance(expert_empirical, expert_empirical, &config.dclass)?;

    let tol = config.rl_oracle_tol;
    // the uniform policy's occupancy is the first play, which keeps the
    // averaged occupancy strictly positive wherever the dynamics reach
    let initial = occupancy(mdp, &TabularPolicy::uniform(n, k))?;
    let mut rho_sum: Vec<T> = initial.state_action_dist().to_vec();
    let mut d_sum: Vec<T> = initial.state_dist().to_vec();
    let mut last_rho: Vec<T> = initial.state_action_dist().to_vec();
    let mut plays = 1usize;
    let mut disc_sum = vec![T::zero(); n * k];
    let mut weights = match &config.dclass {
        DiscriminatorClass::LinearFeature { features, .. } => vec![T::zero(); features.dim()],
        DiscriminatorClass::CompleteIndicator { .. } => Vec::new(),
    };

    let mut trace = Vec::with_capacity(config.outer_iterations);
    let mut gap = T::infinity();
    let mut best_lower = T::neg_infinity();
    let mut best_objective = T::infinity();
    let mut best = (initial.state_dist().to_vec(), initial.state_action_dist().to_vec());
    for t in 1..=config.outer_iterations {
        let disc = match &config.dclass {
            DiscriminatorClass::CompleteIndicator { .. } => {
                config.dclass.best_response(expert_empirical, &average(&rho_sum, plays))?
            }
            DiscriminatorClass::LinearFeature { weight_norm_bound, features, .. } => {
                let diff: Vec<T> = expert_empirical.iter().zip(&last_rho).map(|(&e, &r)| e - r).collect();
                let grad = features.expectation(&diff);
                let step = config.discriminator_step_size / T::from_count(t).sqrt();
                for (w, g) in weights.iter_mut().zip(&grad) {
                    *w = *w + step * *g;
                }
                project_to_ball(&mut weights, *weight_norm_bound);
                features.apply(&weights)
            }
        };
        let (pi_t, _) = max_expected_reward(mdp, &disc, tol)?;
        let occ_t = occupancy(mdp, &pi_t)?;
        add_into(&mut rho_sum, occ_t.state_action_dist());
        add_into(&mut d_sum, occ_t.state_dist());
        add_into(&mut disc_sum, &disc);
        plays += 1;
        last_rho = occ_t.state_action_dist().to_vec();

        let rho_bar = average(&rho_sum, plays);
        let objective = neural_net_distance(expert_empirical, &rho_bar, &config.dclass)?;
        if objective < best_objective {
            best_objective = objective;
            best = (average(&d_sum, plays), rho_bar);
        }
        // every averaged discriminator is a valid certificate, so keep the best one
        let disc_bar = average(&disc_sum, t);
        let (_, best_value) = max_expected_reward(mdp, &disc_bar, tol)?;
        best_lower = best_lower.max(dot(expert_empirical, &disc_bar) - best_value);
        gap = (best_objective - best_lower).max(T::zero());
        trace.push(best_objective);
        if gap <= config.gap_tolerance {
            break;
        }
    }
    let occ = OccupancyMeasure::from_parts_unchecked(n, k, best.0, best.1);
    let policy = occ.extract_policy();
    Ok(TrainingReport {
        algorithm: "gail".into(),
        final_policy: policy,
        objective_trace: trace,
        duality_gap: gap,
        converged: gap <= config.gap_tolerance,
        epsilon_achieved: gap,
        seed,
        occupancy: Some(occ),
    })
}
