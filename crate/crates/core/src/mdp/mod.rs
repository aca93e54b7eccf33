//! Finite discounted MDPs, stationary policies and their occupancy measures.

mod env;
pub(crate) mod sample;
pub(crate) mod solve;

pub use env::{make_environment, CliffGridParams, EnvKind, EnvSpec};
pub use sample::{derive_seed, monte_carlo_value, sample_trajectories, MonteCarloEstimate, Step, Trajectory};
pub use solve::{
    exact_state_distribution, occupancy, optimal_policy, policy_evaluation, policy_transition_matrix,
    policy_value_bellman, policy_value_exact, q_values, softmax_optimal_policy, value_iteration, DEFAULT_RL_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{kahan_sum, Scalar};

pub const MDP_SCHEMA_VERSION: u32 = 1;

fn check_distribution<T: Scalar>(what: &str, xs: &[T], tol: T) -> Result<(), String> {
    if let Some(i) = xs.iter().position(|v| !v.is_finite() || *v < T::zero()) {
        return Err(format!("{what}: entry {i} is negative or non-finite ({})", xs[i]));
    }
    let sum = kahan_sum(xs.iter().copied());
    if (sum - T::one()).abs() > tol {
        return Err(format!("{what}: sums to {sum}, expected 1"));
    }
    Ok(())
}

/// A finite MDP `(S, A, P, r, gamma, d0)` with dense tables.
///
/// `transition` is stored as `P[s][a][s']` flattened row-major, `reward` as
/// `r[s][a]`. All invariants are checked on construction and on
/// deserialization, so a value of this type is always valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FlatMdp<T>", into = "FlatMdp<T>", bound = "T: Scalar")]
pub struct TabularMdp<T> {
    n_states: usize,
    n_actions: usize,
    transition: Vec<T>,
    reward: Vec<T>,
    gamma: T,
    init_dist: Vec<T>,
    r_max: T,
}

/// Flat JSON tensor form of an MDP, used for export and cross-implementation tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FlatMdp<T> {
    pub schema_version: u32,
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: T,
    pub r_max: T,
    pub init_dist: Vec<T>,
    /// `P[s][a][s']` in row-major order.
    pub transition: Vec<T>,
    /// `r[s][a]` in row-major order.
    pub reward: Vec<T>,
}

impl<T: Scalar> TryFrom<FlatMdp<T>> for TabularMdp<T> {
    type Error = Error;

    fn try_from(f: FlatMdp<T>) -> Result<Self> {
        if f.schema_version != MDP_SCHEMA_VERSION {
            return Err(Error::InvalidMdp(format!("unsupported schema_version {}", f.schema_version)));
        }
        TabularMdp::new(f.n_states, f.n_actions, f.transition, f.reward, f.gamma, f.init_dist)?
            .with_r_max(f.r_max)
    }
}

impl<T: Scalar> From<TabularMdp<T>> for FlatMdp<T> {
    fn from(m: TabularMdp<T>) -> Self {
        FlatMdp {
            schema_version: MDP_SCHEMA_VERSION,
            n_states: m.n_states,
            n_actions: m.n_actions,
            gamma: m.gamma,
            r_max: m.r_max,
            init_dist: m.init_dist,
            transition: m.transition,
            reward: m.reward,
        }
    }
}

impl<T: Scalar> TabularMdp<T> {
    /// Builds and validates an MDP; `r_max` is set to `max |r(s,a)|`.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<T>,
        reward: Vec<T>,
        gamma: T,
        init_dist: Vec<T>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidMdp("need at least one state and one action".into()));
        }
        let (n, k) = (n_states, n_actions);
        if transition.len() != n * k * n {
            return Err(Error::InvalidMdp(format!(
                "transition tensor has {} entries, expected {}",
                transition.len(),
                n * k * n
            )));
        }
        if reward.len() != n * k {
            return Err(Error::InvalidMdp(format!("reward table has {} entries, expected {}", reward.len(), n * k)));
        }
        if init_dist.len() != n {
            return Err(Error::InvalidMdp(format!("d0 has {} entries, expected {n}", init_dist.len())));
        }
        if !(gamma > T::zero() && gamma < T::one()) {
            return Err(Error::InvalidMdp(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        for s in 0..n {
            for a in 0..k {
                let row = &transition[(s * k + a) * n..(s * k + a + 1) * n];
                check_distribution(&format!("P[{s}][{a}]"), row, T::prob_tol()).map_err(Error::InvalidMdp)?;
            }
        }
        check_distribution("d0", &init_dist, T::prob_tol()).map_err(Error::InvalidMdp)?;
        if reward.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidMdp("reward table has non-finite entries".into()));
        }
        let r_max = reward.iter().fold(T::zero(), |m, r| m.max(r.abs()));
        Ok(Self { n_states, n_actions, transition, reward, gamma, init_dist, r_max })
    }

    /// Overrides the declared reward bound; it may not be below `max |r|`.
    pub fn with_r_max(mut self, r_max: T) -> Result<Self> {
        let actual = self.reward.iter().fold(T::zero(), |m, r| m.max(r.abs()));
        if !(r_max >= actual) || !r_max.is_finite() {
            return Err(Error::InvalidMdp(format!("r_max {r_max} is below max |r| = {actual}")));
        }
        self.r_max = r_max;
        Ok(self)
    }

    pub fn with_gamma(&self, gamma: T) -> Result<Self> {
        if !(gamma > T::zero() && gamma < T::one()) {
            return Err(Error::InvalidMdp(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        Ok(Self { gamma, ..self.clone() })
    }

    /// Same dynamics with a different reward table.
    pub fn with_reward(&self, reward: Vec<T>) -> Result<Self> {
        TabularMdp::new(
            self.n_states,
            self.n_actions,
            self.transition.clone(),
            reward,
            self.gamma,
            self.init_dist.clone(),
        )
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn init_dist(&self) -> &[T] {
        &self.init_dist
    }

    pub fn rewards(&self) -> &[T] {
        &self.reward
    }

    #[inline]
    pub fn reward(&self, s: usize, a: usize) -> T {
        self.reward[s * self.n_actions + a]
    }

    /// Next-state distribution `P[s][a][.]`.
    #[inline]
    pub fn next_dist(&self, s: usize, a: usize) -> &[T] {
        let n = self.n_states;
        let base = (s * self.n_actions + a) * n;
        &self.transition[base..base + n]
    }

    pub fn to_flat(&self) -> FlatMdp<T> {
        self.clone().into()
    }
}

/// Stationary stochastic policy `pi(a|s)`, stored as a dense table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolicyTable<T>", into = "PolicyTable<T>", bound = "T: Scalar")]
pub struct TabularPolicy<T> {
    n_states: usize,
    n_actions: usize,
    probs: Vec<T>,
}

/// JSON table form of a policy: one row of action probabilities per state.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PolicyTable<T> {
    pub probs: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<PolicyTable<T>> for TabularPolicy<T> {
    type Error = Error;

    fn try_from(t: PolicyTable<T>) -> Result<Self> {
        let n = t.probs.len();
        let k = t.probs.first().map_or(0, Vec::len);
        if t.probs.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidPolicy("ragged policy table".into()));
        }
        TabularPolicy::new(n, k, t.probs.into_iter().flatten().collect())
    }
}

impl<T: Scalar> From<TabularPolicy<T>> for PolicyTable<T> {
    fn from(p: TabularPolicy<T>) -> Self {
        PolicyTable { probs: p.probs.chunks(p.n_actions).map(<[T]>::to_vec).collect() }
    }
}

impl<T: Scalar> TabularPolicy<T> {
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<T>) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidPolicy("need at least one state and one action".into()));
        }
        if probs.len() != n_states * n_actions {
            return Err(Error::InvalidPolicy(format!(
                "table has {} entries, expected {}",
                probs.len(),
                n_states * n_actions
            )));
        }
        for (s, row) in probs.chunks(n_actions).enumerate() {
            check_distribution(&format!("pi(.|{s})"), row, T::prob_tol()).map_err(Error::InvalidPolicy)?;
        }
        Ok(Self { n_states, n_actions, probs })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        let p = T::one() / T::from_count(n_actions);
        Self { n_states, n_actions, probs: vec![p; n_states * n_actions] }
    }

    /// Deterministic policy choosing `actions[s]` in state `s`.
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Result<Self> {
        if let Some(a) = actions.iter().find(|&&a| a >= n_actions) {
            return Err(Error::InvalidPolicy(format!("action {a} out of range for {n_actions} actions")));
        }
        let mut probs = vec![T::zero(); actions.len() * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            probs[s * n_actions + a] = T::one();
        }
        Self::new(actions.len(), n_actions, probs)
    }

    /// Builds a policy from non-negative per-state weights, normalizing each row.
    /// Rows with zero total weight become uniform.
    pub fn from_weights(n_states: usize, n_actions: usize, weights: &[T]) -> Result<Self> {
        if weights.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch(format!(
                "weights have {} entries, expected {}",
                weights.len(),
                n_states * n_actions
            )));
        }
        let uniform = T::one() / T::from_count(n_actions);
        let mut probs = Vec::with_capacity(weights.len());
        for row in weights.chunks(n_actions) {
            let clipped: Vec<T> = row.iter().map(|w| w.max(T::zero())).collect();
            let total = kahan_sum(clipped.iter().copied());
            if total > T::zero() {
                probs.extend(clipped.iter().map(|&w| w / total));
            } else {
                probs.extend(std::iter::repeat_n(uniform, n_actions));
            }
        }
        Self::new(n_states, n_actions, probs)
    }

    /// Pointwise mixture `(1 - eta) * self + eta * other`.
    pub fn mix(&self, other: &Self, eta: T) -> Result<Self> {
        if self.n_states != other.n_states || self.n_actions != other.n_actions {
            return Err(Error::DimensionMismatch("policies have different shapes".into()));
        }
        let probs = self.probs.iter().zip(&other.probs).map(|(&p, &q)| (T::one() - eta) * p + eta * q).collect();
        Self::new(self.n_states, self.n_actions, probs)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn table(&self) -> &[T] {
        &self.probs
    }

    #[inline]
    pub fn probs(&self, s: usize) -> &[T] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    #[inline]
    pub fn prob(&self, s: usize, a: usize) -> T {
        self.probs[s * self.n_actions + a]
    }

    /// Most likely action; ties go to the lowest index.
    pub fn greedy_action(&self, s: usize) -> usize {
        let row = self.probs(s);
        let mut best = 0;
        for a in 1..row.len() {
            if row[a] > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn greedy_actions(&self) -> Vec<usize> {
        (0..self.n_states).map(|s| self.greedy_action(s)).collect()
    }

    /// The deterministic policy that plays `greedy_action` everywhere.
    pub fn determinized(&self) -> Self {
        Self::deterministic(&self.greedy_actions(), self.n_actions).expect("greedy actions are in range")
    }

    pub fn is_deterministic(&self) -> bool {
        self.probs.iter().all(|&p| p == T::zero() || p == T::one())
    }

    pub fn check_shape(&self, n_states: usize, n_actions: usize) -> Result<()> {
        if self.n_states != n_states || self.n_actions != n_actions {
            return Err(Error::DimensionMismatch(format!(
                "policy is {}x{}, MDP is {n_states}x{n_actions}",
                self.n_states, self.n_actions
            )));
        }
        Ok(())
    }
}

/// Discounted state distribution `d` and state-action distribution `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OccupancyMeasure<T> {
    n_states: usize,
    n_actions: usize,
    state_dist: Vec<T>,
    state_action_dist: Vec<T>,
}

impl<T: Scalar> OccupancyMeasure<T> {
    /// Wraps a state-action table; the state marginal is derived from it.
    pub fn from_state_action(n_states: usize, n_actions: usize, rho: Vec<T>) -> Result<Self> {
        if rho.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch(format!(
                "rho has {} entries, expected {}",
                rho.len(),
                n_states * n_actions
            )));
        }
        check_distribution("rho", &rho, T::solve_tol()).map_err(Error::InvalidDistribution)?;
        let state_dist = rho.chunks(n_actions).map(|row| kahan_sum(row.iter().copied())).collect();
        Ok(Self { n_states, n_actions, state_dist, state_action_dist: rho })
    }

    pub(crate) fn from_parts_unchecked(n_states: usize, n_actions: usize, state_dist: Vec<T>, rho: Vec<T>) -> Self {
        Self { n_states, n_actions, state_dist, state_action_dist: rho }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn state_dist(&self) -> &[T] {
        &self.state_dist
    }

    /// Flattened `rho[s][a]`.
    pub fn state_action_dist(&self) -> &[T] {
        &self.state_action_dist
    }

    #[inline]
    pub fn rho(&self, s: usize, a: usize) -> T {
        self.state_action_dist[s * self.n_actions + a]
    }

    /// Checks normalization, marginal consistency and non-negativity at `tol`.
    pub fn validate(&self, tol: T) -> Result<()> {
        check_distribution("d", &self.state_dist, tol).map_err(Error::InvalidDistribution)?;
        check_distribution("rho", &self.state_action_dist, tol).map_err(Error::InvalidDistribution)?;
        for (s, row) in self.state_action_dist.chunks(self.n_actions).enumerate() {
            let marginal = kahan_sum(row.iter().copied());
            if (marginal - self.state_dist[s]).abs() > tol {
                return Err(Error::InvalidDistribution(format!(
                    "marginal of rho at state {s} is {marginal}, d is {}",
                    self.state_dist[s]
                )));
            }
        }
        Ok(())
    }

    /// Convex combination `sum_i w_i * occ_i`; weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(T, &OccupancyMeasure<T>)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty("mixture components"))?.1;
        let (n, k) = (first.n_states, first.n_actions);
        let mut d = vec![T::zero(); n];
        let mut rho = vec![T::zero(); n * k];
        for (w, occ) in parts {
            if occ.n_states != n || occ.n_actions != k {
                return Err(Error::DimensionMismatch("mixture components differ in shape".into()));
            }
            for (acc, v) in d.iter_mut().zip(&occ.state_dist) {
                *acc = *acc + *w * *v;
            }
            for (acc, v) in rho.iter_mut().zip(&occ.state_action_dist) {
                *acc = *acc + *w * *v;
            }
        }
        Ok(Self { n_states: n, n_actions: k, state_dist: d, state_action_dist: rho })
    }

    /// Policy with this occupancy: `pi(a|s) = rho(s,a) / sum_a rho(s,a)`,
    /// uniform where the state has no mass.
    pub fn extract_policy(&self) -> TabularPolicy<T> {
        TabularPolicy::from_weights(self.n_states, self.n_actions, &self.state_action_dist)
            .expect("occupancy table has consistent shape")
    }
}
