use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{TabularMdp, TabularPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Step<T> {
    pub state: usize,
    pub action: usize,
    pub reward: T,
}

/// A rollout truncated at `horizon` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Trajectory<T> {
    pub steps: Vec<Step<T>>,
    pub horizon: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `sum_t gamma^t r_t`.
    pub fn discounted_return(&self, gamma: T) -> T {
        let mut g = T::zero();
        let mut w = T::one();
        for step in &self.steps {
            g = g + w * step.reward;
            w = w * gamma;
        }
        g
    }
}

/// Inverse-CDF draw from a probability row.
pub(crate) fn draw_index<T: Scalar, R: Rng + ?Sized>(rng: &mut R, probs: &[T]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, p) in probs.iter().enumerate() {
        let p = p.as_f64();
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

pub(crate) fn rollout<T: Scalar, R: Rng + ?Sized>(
    mdp: &TabularMdp<T>,
    pi: &TabularPolicy<T>,
    horizon: usize,
    rng: &mut R,
) -> Trajectory<T> {
    let mut steps = Vec::with_capacity(horizon);
    let mut s = draw_index(rng, mdp.init_dist());
    for _ in 0..horizon {
        let a = draw_index(rng, pi.probs(s));
        steps.push(Step { state: s, action: a, reward: mdp.reward(s, a) });
        s = draw_index(rng, mdp.next_dist(s, a));
    }
    Trajectory { steps, horizon }
}

/// Samples `count` independent rollouts of length `horizon` from `s0 ~ d0`.
///
/// The stream is a ChaCha8 generator seeded with `seed`, so results are
/// bit-reproducible.
pub fn sample_trajectories<T: Scalar>(
    mdp: &TabularMdp<T>,
    pi: &TabularPolicy<T>,
    horizon: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Trajectory<T>>> {
    pi.check_shape(mdp.n_states(), mdp.n_actions())?;
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| rollout(mdp, pi, horizon, &mut rng)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MonteCarloEstimate<T> {
    pub mean: T,
    pub std_error: T,
}

/// Mean discounted return over trajectories with its standard error.
pub fn monte_carlo_value<T: Scalar>(trajectories: &[Trajectory<T>], gamma: T) -> Result<MonteCarloEstimate<T>> {
    if trajectories.is_empty() {
        return Err(Error::Empty("trajectories"));
    }
    let returns: Vec<T> = trajectories.iter().map(|t| t.discounted_return(gamma)).collect();
    let n = T::from_count(returns.len());
    let mean = returns.iter().copied().sum::<T>() / n;
    let std_error = if returns.len() < 2 {
        T::zero()
    } else {
        let var = returns.iter().map(|&r| (r - mean) * (r - mean)).sum::<T>() / (n - T::one());
        (var / n).sqrt()
    };
    Ok(MonteCarloEstimate { mean, std_error })
}

/// Independent child seed for stream `index` of `base` (SplitMix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
