//! Apprenticeship learning with linear reward classes: the projection variant
//! of feature-expectation matching (FEM) and the multiplicative-weights game
//! solver (MWAL). Both call the exact RL oracle once per round and return a
//! policy extracted from a mixture of occupancies.

use serde::{Deserialize, Serialize};

use crate::divergences::{dot, empirical_occupancy, norm2, DemoSet, FeatureTable};
use crate::error::{Error, Result};
use crate::mdp::solve::best_response_with_values;
use crate::mdp::{occupancy, OccupancyMeasure, TabularMdp, TabularPolicy, DEFAULT_RL_TOL};
use crate::scalar::{kahan_sum, Scalar};

use super::TrainingReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ApprenticeshipConfig<T> {
    pub iterations: usize,
    pub rl_oracle_tol: T,
    /// FEM stops once `||mu_mix - mu_E||_2` falls to this value.
    pub tolerance: T,
}

impl<T: Scalar> ApprenticeshipConfig<T> {
    pub fn new(iterations: usize) -> Self {
        Self { iterations, rl_oracle_tol: T::lit(DEFAULT_RL_TOL), tolerance: T::lit(1e-8) }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        if !(self.rl_oracle_tol > T::zero()) || self.tolerance < T::zero() {
            return Err(Error::InvalidParameter("rl_oracle_tol must be positive and tolerance non-negative".into()));
        }
        Ok(())
    }
}

/// `mu(pi) = Phi^T rho_pi`, the feature expectation under the normalized
/// discounted occupancy.
pub fn feature_expectation<T: Scalar>(
    mdp: &TabularMdp<T>,
    pi: &TabularPolicy<T>,
    features: &FeatureTable<T>,
) -> Result<Vec<T>> {
    check_grid(mdp, features)?;
    Ok(features.expectation(occupancy(mdp, pi)?.state_action_dist()))
}

/// Feature expectation under the empirical distribution of demonstration
/// pairs (discounted-resampled pairs give an unbiased estimate).
pub fn expert_feature_expectation<T: Scalar>(demos: &DemoSet, features: &FeatureTable<T>) -> Result<Vec<T>> {
    let rho = empirical_occupancy(demos, features.n_states(), features.n_actions())?;
    Ok(features.expectation(&rho))
}

fn check_grid<T: Scalar>(mdp: &TabularMdp<T>, features: &FeatureTable<T>) -> Result<()> {
    if features.n_states() != mdp.n_states() || features.n_actions() != mdp.n_actions() {
        return Err(Error::DimensionMismatch(format!(
            "features cover a {}x{} grid, MDP is {}x{}",
            features.n_states(),
            features.n_actions(),
            mdp.n_states(),
            mdp.n_actions()
        )));
    }
    Ok(())
}

fn check_inputs<T: Scalar>(mdp: &TabularMdp<T>, target: &[T], features: &FeatureTable<T>) -> Result<()> {
    check_grid(mdp, features)?;
    if target.len() != features.dim() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} entries, features have dimension {}",
            target.len(),
            features.dim()
        )));
    }
    if features.max_row_norm() == T::zero() {
        return Err(Error::InvalidParameter("degenerate features: every feature vector is zero".into()));
    }
    Ok(())
}

/// `(pi, rho_pi, max_pi E_rho[reward])` for the RL best response to `reward`.
fn oracle<T: Scalar>(mdp: &TabularMdp<T>, reward: &[T], tol: T) -> Result<(OccupancyMeasure<T>, T)> {
    let (pi, v) = best_response_with_values(mdp, reward, tol)?;
    let best = (T::one() - mdp.gamma()) * kahan_sum(mdp.init_dist().iter().zip(&v).map(|(&d, &x)| d * x));
    Ok((occupancy(mdp, &pi)?, best))
}

fn axpy<T: Scalar>(into: &mut [T], keep: T, add: T, other: &[T]) {
    for (x, &y) in into.iter_mut().zip(other) {
        *x = keep * *x + add * y;
    }
}

/// Projection method for feature-expectation matching.
///
/// Round `i` sets `w = mu_E - mu_mix`, best-responds to the reward `Phi w`,
/// and moves `mu_mix` to the point of the segment towards the new feature
/// expectation closest to `mu_E`. The trace records `||mu_mix - mu_E||_2`,
/// which therefore never increases.
pub fn fem_train<T: Scalar>(
    mdp: &TabularMdp<T>,
    expert_feature_expectation: &[T],
    features: &FeatureTable<T>,
    config: &ApprenticeshipConfig<T>,
) -> Result<TrainingReport<T>> {
    config.validate()?;
    check_inputs(mdp, expert_feature_expectation, features)?;
    let mu_e = expert_feature_expectation;
    let start = occupancy(mdp, &TabularPolicy::uniform(mdp.n_states(), mdp.n_actions()))?;
    let mut rho_mix = start.state_action_dist().to_vec();
    let mut d_mix = start.state_dist().to_vec();
    let mut mu_mix = features.expectation(&rho_mix);

    let mut trace = Vec::with_capacity(config.iterations);
    let mut gap = T::infinity();
    for _ in 0..config.iterations {
        let w: Vec<T> = mu_e.iter().zip(&mu_mix).map(|(&e, &m)| e - m).collect();
        let dist = norm2(&w);
        if dist <= config.tolerance {
            gap = dist;
            trace.push(dist);
            break;
        }
        let (occ, best) = oracle(mdp, &features.apply(&w), config.rl_oracle_tol)?;
        // min over mixtures of ||mu - mu_E|| >= (w . mu_E - max_pi w . mu_pi) / ||w||
        let lower = ((dot(&w, mu_e) - best) / dist).max(T::zero());
        let mu_new = features.expectation(occ.state_action_dist());
        let step: Vec<T> = mu_new.iter().zip(&mu_mix).map(|(&a, &b)| a - b).collect();
        let denom = dot(&step, &step);
        let alpha = if denom > T::zero() { (dot(&step, &w) / denom).max(T::zero()).min(T::one()) } else { T::zero() };
        axpy(&mut rho_mix, T::one() - alpha, alpha, occ.state_action_dist());
        axpy(&mut d_mix, T::one() - alpha, alpha, occ.state_dist());
        axpy(&mut mu_mix, T::one() - alpha, alpha, &mu_new);
        let objective = norm2(&mu_e.iter().zip(&mu_mix).map(|(&e, &m)| e - m).collect::<Vec<_>>());
        trace.push(objective);
        gap = (objective - lower).max(T::zero());
        if objective <= config.tolerance {
            break;
        }
    }
    let occ = OccupancyMeasure::from_parts_unchecked(mdp.n_states(), mdp.n_actions(), d_mix, rho_mix);
    let objective = *trace.last().expect("at least one round");
    Ok(TrainingReport {
        algorithm: "fem".into(),
        final_policy: occ.extract_policy(),
        objective_trace: trace,
        duality_gap: gap,
        converged: objective <= config.tolerance,
        epsilon_achieved: gap,
        seed: 0,
        occupancy: Some(occ),
    })
}

/// Multiplicative-weights apprenticeship learning.
///
/// Features must lie in `[0, 1]`. The weight player keeps a distribution over
/// features and is charged `(mu_t - mu_E + 1) / 2` per feature; the policy
/// player best-responds to the reward `Phi w_t`. The result is the uniform
/// mixture of the best-response occupancies. The trace records the shortfall
/// `max_i (mu_E - mu_mix)_i` after each round.
pub fn mwal_train<T: Scalar>(
    mdp: &TabularMdp<T>,
    expert_feature_expectation: &[T],
    features: &FeatureTable<T>,
    config: &ApprenticeshipConfig<T>,
) -> Result<TrainingReport<T>> {
    config.validate()?;
    check_inputs(mdp, expert_feature_expectation, features)?;
    if features.min_value() < T::zero() || features.max_value() > T::one() {
        return Err(Error::InvalidParameter("MWAL features must lie in [0, 1]".into()));
    }
    let mu_e = expert_feature_expectation;
    let dim = features.dim();
    let rounds = if dim == 1 { 1 } else { config.iterations };
    let beta = T::one() / (T::one() + (T::lit(2.0) * T::from_count(dim).ln() / T::from_count(rounds)).sqrt());

    let mut weights = vec![T::one(); dim];
    let mut rho_sum = vec![T::zero(); mdp.n_states() * mdp.n_actions()];
    let mut d_sum = vec![T::zero(); mdp.n_states()];
    let mut mu_sum = vec![T::zero(); dim];
    let mut w_sum = vec![T::zero(); dim];
    let mut trace = Vec::with_capacity(rounds);
    let mut gap = T::infinity();
    for t in 1..=rounds {
        let total = kahan_sum(weights.iter().copied());
        let w: Vec<T> = weights.iter().map(|&x| x / total).collect();
        let (occ, _) = oracle(mdp, &features.apply(&w), config.rl_oracle_tol)?;
        let mu = features.expectation(occ.state_action_dist());
        axpy(&mut rho_sum, T::one(), T::one(), occ.state_action_dist());
        axpy(&mut d_sum, T::one(), T::one(), occ.state_dist());
        axpy(&mut mu_sum, T::one(), T::one(), &mu);
        axpy(&mut w_sum, T::one(), T::one(), &w);
        let half = T::lit(0.5);
        for ((x, &m), &e) in weights.iter_mut().zip(&mu).zip(mu_e) {
            *x = *x * beta.powf((m - e + T::one()) * half);
        }

        let tt = T::from_count(t);
        let mu_bar: Vec<T> = mu_sum.iter().map(|&x| x / tt).collect();
        let shortfall = mu_e.iter().zip(&mu_bar).map(|(&e, &m)| e - m).fold(T::neg_infinity(), T::max);
        trace.push(shortfall);
        // game value v = max_pi min_w w.(mu_pi - mu_E): mixture gives -shortfall <= v,
        // and the averaged weights give v <= max_pi w_bar.(mu_pi - mu_E)
        let w_bar: Vec<T> = w_sum.iter().map(|&x| x / tt).collect();
        let (_, best) = oracle(mdp, &features.apply(&w_bar), config.rl_oracle_tol)?;
        let upper = best - dot(&w_bar, mu_e);
        gap = (upper + shortfall).max(T::zero());
    }
    let tt = T::from_count(rounds);
    let occ = OccupancyMeasure::from_parts_unchecked(
        mdp.n_states(),
        mdp.n_actions(),
        d_sum.into_iter().map(|x| x / tt).collect(),
        rho_sum.into_iter().map(|x| x / tt).collect(),
    );
    Ok(TrainingReport {
        algorithm: "mwal".into(),
        final_policy: occ.extract_policy(),
        objective_trace: trace,
        duality_gap: gap,
        converged: true,
        epsilon_achieved: gap,
        seed: 0,
        occupancy: Some(occ),
    })
}

/// Upper envelope on the MWAL shortfall after `t` rounds when the target is
/// achievable, derived from the multiplicative-weights loss bound
/// `L_alg <= (ln(1/beta) L_best + ln k / t) / (1 - beta)`.
pub fn mwal_shortfall_envelope(dim: usize, rounds: usize, t: usize) -> f64 {
    if dim <= 1 {
        return 0.0;
    }
    let ln_k = (dim as f64).ln();
    let beta = 1.0 / (1.0 + (2.0 * ln_k / rounds as f64).sqrt());
    let c = (1.0 / beta).ln();
    1.0 - ((1.0 - beta) - 2.0 * ln_k / t as f64) / c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{make_environment, optimal_policy, policy_value_exact, EnvKind, EnvSpec};

    fn random_mdp(seed: u64) -> TabularMdp<f64> {
        make_environment(&EnvSpec::new(EnvKind::Random { n_states: 5, n_actions: 3, branching: None }, 0.8, seed)).unwrap()
    }

    #[test]
    fn fem_trace_is_monotone_and_reaches_expert() {
        let mdp = random_mdp(3);
        let expert = optimal_policy(&mdp, 1e-10).unwrap();
        let features = FeatureTable::state_action_indicators(5, 3);
        let mu_e = feature_expectation(&mdp, &expert, &features).unwrap();
        let report = fem_train(&mdp, &mu_e, &features, &ApprenticeshipConfig::new(200)).unwrap();
        for w in report.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(*report.objective_trace.last().unwrap() < 0.05);
    }

    #[test]
    fn fem_with_reward_feature_closes_value_gap() {
        let mdp = random_mdp(5);
        let expert = optimal_policy(&mdp, 1e-10).unwrap();
        let features = FeatureTable::from_reward(&mdp);
        let mu_e = feature_expectation(&mdp, &expert, &features).unwrap();
        let report = fem_train(&mdp, &mu_e, &features, &ApprenticeshipConfig::new(50)).unwrap();
        let gap = (policy_value_exact(&mdp, &report.final_policy).unwrap() - policy_value_exact(&mdp, &expert).unwrap()).abs();
        assert!(gap < 1e-6, "gap {gap}");
    }

    #[test]
    fn zero_features_rejected() {
        let mdp = random_mdp(1);
        let features = FeatureTable::new(5, 3, 1, vec![0.0; 15]).unwrap();
        assert!(fem_train(&mdp, &[0.0], &features, &ApprenticeshipConfig::new(3)).is_err());
        assert!(mwal_train(&mdp, &[0.0], &features, &ApprenticeshipConfig::new(3)).is_err());
    }

    #[test]
    fn mwal_single_feature_is_one_solve() {
        let mdp = random_mdp(2);
        let values: Vec<f64> = mdp.rewards().iter().map(|r| (r + 1.0) / 2.0).collect();
        let features = FeatureTable::new(5, 3, 1, values).unwrap();
        let report = mwal_train(&mdp, &[0.5], &features, &ApprenticeshipConfig::new(40)).unwrap();
        assert_eq!(report.iterations(), 1);
    }

    #[test]
    fn mwal_shortfall_within_envelope() {
        let mdp = random_mdp(9);
        let expert = optimal_policy(&mdp, 1e-10).unwrap();
        let features = FeatureTable::state_indicators(5, 3);
        let mu_e = feature_expectation(&mdp, &expert, &features).unwrap();
        let rounds = 300;
        let report = mwal_train(&mdp, &mu_e, &features, &ApprenticeshipConfig::new(rounds)).unwrap();
        for (i, &s) in report.objective_trace.iter().enumerate() {
            assert!(s <= mwal_shortfall_envelope(5, rounds, i + 1) + 1e-12, "round {i}: {s}");
        }
    }
}
