//! Seeded generators for the tabular test environments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::TabularMdp;

/// Serializable environment description: `{"kind", "params", "gamma", "seed"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    #[serde(flatten)]
    pub kind: EnvKind,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_gamma() -> f64 {
    0.9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum EnvKind {
    /// Dense (or `branching`-sparse) Dirichlet transitions, uniform rewards in
    /// `[-1, 1]` and a full-support initial distribution.
    Random {
        n_states: usize,
        n_actions: usize,
        #[serde(default)]
        branching: Option<usize>,
    },
    /// Action 0 advances along the chain (the last state absorbs), any other
    /// action resets to state 0. Starts in state 0.
    Chain {
        n_states: usize,
        #[serde(default = "one")]
        n_actions: usize,
        #[serde(default = "unit")]
        start_reward: f64,
        #[serde(default)]
        end_reward: f64,
    },
    CliffGrid(CliffGridParams),
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

/// Corridor gridworld bounded above and below by absorbing cliff rows.
///
/// The agent starts at the left end of the middle row and is rewarded on
/// reaching the right end, after which it is returned to the start. With
/// probability `slip` the move goes in a uniformly random direction instead
/// of the intended one, so the agent occasionally drifts toward the cliff;
/// states far from the middle row are rarely visited by a good policy, and
/// a wrong action there can be fatal. Cliff cells absorb and pay
/// `-cliff_penalty` on every step.
///
/// Actions: 0 = up, 1 = right, 2 = down, 3 = left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffGridParams {
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_slip")]
    pub slip: f64,
    #[serde(default = "unit")]
    pub cliff_penalty: f64,
    #[serde(default = "unit")]
    pub goal_reward: f64,
}

fn default_slip() -> f64 {
    0.1
}

impl CliffGridParams {
    pub fn new(width: usize, height: usize, slip: f64) -> Self {
        Self { width, height, slip, cliff_penalty: 1.0, goal_reward: 1.0 }
    }

    pub fn state(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn start(&self) -> usize {
        self.state(self.middle_row(), 0)
    }

    pub fn goal(&self) -> usize {
        self.state(self.middle_row(), self.width - 1)
    }

    pub fn middle_row(&self) -> usize {
        (self.height - 1) / 2
    }

    pub fn is_cliff(&self, s: usize) -> bool {
        let row = s / self.width;
        row == 0 || row == self.height - 1
    }
}

impl EnvSpec {
    pub fn new(kind: EnvKind, gamma: f64, seed: u64) -> Self {
        Self { kind, gamma, seed }
    }

    pub fn build<T: Scalar>(&self) -> Result<TabularMdp<T>> {
        make_environment(self)
    }
}

fn dirichlet_row<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-12).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn convert<T: Scalar>(xs: Vec<f64>) -> Vec<T> {
    xs.into_iter().map(T::lit).collect()
}

/// Builds the MDP described by `spec`; deterministic in `spec.seed`.
pub fn make_environment<T: Scalar>(spec: &EnvSpec) -> Result<TabularMdp<T>> {
    let gamma = T::lit(spec.gamma);
    match &spec.kind {
        EnvKind::Random { n_states, n_actions, branching } => {
            let (n, k) = (*n_states, *n_actions);
            if n == 0 || k == 0 {
                return Err(Error::InvalidParameter("random MDP needs n_states, n_actions >= 1".into()));
            }
            let b = branching.unwrap_or(n);
            if b == 0 || b > n {
                return Err(Error::InvalidParameter(format!("branching must lie in 1..={n}, got {b}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut transition = vec![0.0; n * k * n];
            for sa in 0..n * k {
                let row = &mut transition[sa * n..(sa + 1) * n];
                let weights = dirichlet_row(&mut rng, b);
                if b == n {
                    row.copy_from_slice(&weights);
                } else {
                    let targets = rand::seq::index::sample(&mut rng, n, b);
                    for (t, w) in targets.iter().zip(weights) {
                        row[t] = w;
                    }
                }
            }
            let reward: Vec<f64> = (0..n * k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let init = dirichlet_row(&mut rng, n);
            TabularMdp::new(n, k, convert(transition), convert(reward), gamma, convert(init))?.with_r_max(T::one())
        }
        EnvKind::Chain { n_states, n_actions, start_reward, end_reward } => {
            let (n, k) = (*n_states, *n_actions);
            if n == 0 || k == 0 {
                return Err(Error::InvalidParameter("chain needs n_states, n_actions >= 1".into()));
            }
            let mut transition = vec![0.0; n * k * n];
            for s in 0..n {
                for a in 0..k {
                    let next = if a == 0 { (s + 1).min(n - 1) } else { 0 };
                    transition[(s * k + a) * n + next] = 1.0;
                }
            }
            let mut reward = vec![0.0; n * k];
            for a in 0..k {
                if n > 1 {
                    reward[(n - 1) * k + a] = *end_reward;
                }
                reward[a] = *start_reward;
            }
            let mut init = vec![0.0; n];
            init[0] = 1.0;
            TabularMdp::new(n, k, convert(transition), convert(reward), gamma, convert(init))
        }
        EnvKind::CliffGrid(p) => cliff_grid(p, gamma),
    }
}

fn cliff_grid<T: Scalar>(p: &CliffGridParams, gamma: T) -> Result<TabularMdp<T>> {
    if p.width < 2 || p.height < 3 {
        return Err(Error::InvalidParameter(format!(
            "cliff grid needs width >= 2 and height >= 3, got {}x{}",
            p.width, p.height
        )));
    }
    if !(0.0..=1.0).contains(&p.slip) {
        return Err(Error::InvalidParameter(format!("slip must lie in [0, 1], got {}", p.slip)));
    }
    if !(p.cliff_penalty >= 0.0 && p.goal_reward >= 0.0) {
        return Err(Error::InvalidParameter("cliff_penalty and goal_reward must be non-negative".into()));
    }
    let (w, h) = (p.width, p.height);
    let n = w * h;
    let k = 4;
    let moves: [(isize, isize); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];
    let target = |s: usize, dir: usize| -> usize {
        let (r, c) = ((s / w) as isize, (s % w) as isize);
        let (dr, dc) = moves[dir];
        let nr = (r + dr).clamp(0, h as isize - 1);
        let nc = c + dc;
        let nc = if nc < 0 || nc >= w as isize { c } else { nc };
        nr as usize * w + nc as usize
    };
    let mut transition = vec![0.0; n * k * n];
    let mut reward = vec![0.0; n * k];
    for s in 0..n {
        for a in 0..k {
            let row = &mut transition[(s * k + a) * n..(s * k + a + 1) * n];
            if p.is_cliff(s) {
                row[s] = 1.0;
                reward[s * k + a] = -p.cliff_penalty;
            } else if s == p.goal() {
                row[p.start()] = 1.0;
                reward[s * k + a] = p.goal_reward;
            } else {
                row[target(s, a)] += 1.0 - p.slip;
                for dir in 0..k {
                    row[target(s, dir)] += p.slip / k as f64;
                }
            }
        }
    }
    let mut init = vec![0.0; n];
    init[p.start()] = 1.0;
    TabularMdp::new(n, k, convert(transition), convert(reward), gamma, convert(init))
}
