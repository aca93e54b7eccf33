//! Divergences between discrete distributions and policies, integral
//! probability metrics over explicit discriminator classes, and the sample
//! quantities (empirical occupancy, Rademacher complexity) used by the
//! generalization bounds.
//!
//! All logarithms are natural.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{exact_state_distribution, OccupancyMeasure, TabularMdp, TabularPolicy, Trajectory};
use crate::scalar::{kahan_sum, Scalar};

fn check_pair<T: Scalar>(p: &[T], q: &[T]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!("distributions have lengths {} and {}", p.len(), q.len())));
    }
    check_normalized("p", p)?;
    check_normalized("q", q)
}

fn check_normalized<T: Scalar>(what: &str, p: &[T]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Empty("distribution"));
    }
    if let Some(i) = p.iter().position(|v| !v.is_finite() || *v < T::zero()) {
        return Err(Error::InvalidDistribution(format!("{what}[{i}] = {} is negative or non-finite", p[i])));
    }
    let sum = kahan_sum(p.iter().copied());
    if (sum - T::one()).abs() > T::solve_tol() {
        return Err(Error::InvalidDistribution(format!("{what} sums to {sum}")));
    }
    Ok(())
}

fn l1_diff<T: Scalar>(p: &[T], q: &[T]) -> T {
    kahan_sum(p.iter().zip(q).map(|(&a, &b)| (a - b).abs()))
}

/// Total variation `||p - q||_1 / 2`.
pub fn tv<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    check_pair(p, q)?;
    Ok((l1_diff(p, q) / T::lit(2.0)).min(T::one()))
}

fn kl_unchecked<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    let mut terms = Vec::with_capacity(p.len());
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi == T::zero() {
            continue;
        }
        if qi == T::zero() {
            return Err(Error::SupportViolation(i));
        }
        terms.push(pi * (pi / qi).ln());
    }
    Ok(kahan_sum(terms).max(T::zero()))
}

/// `KL(p || q) = sum_i p_i ln(p_i / q_i)` with `0 ln(0/x) = 0`.
///
/// Errors with [`Error::SupportViolation`] when `q` vanishes where `p` does not.
pub fn kl<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    check_pair(p, q)?;
    kl_unchecked(p, q)
}

/// Jensen-Shannon divergence `(KL(p||m) + KL(q||m)) / 2`, `m = (p + q) / 2`.
pub fn js<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    check_pair(p, q)?;
    let half = T::lit(0.5);
    let m: Vec<T> = p.iter().zip(q).map(|(&a, &b)| half * (a + b)).collect();
    let value = half * (kl_unchecked(p, &m)? + kl_unchecked(q, &m)?);
    Ok(value.min(T::LN_2()))
}

/// Per-state `TV(pi(.|s), pi_ref(.|s))`.
pub fn per_state_tv<T: Scalar>(pi: &TabularPolicy<T>, pi_ref: &TabularPolicy<T>) -> Result<Vec<T>> {
    pi.check_shape(pi_ref.n_states(), pi_ref.n_actions())?;
    Ok((0..pi.n_states()).map(|s| l1_diff(pi.probs(s), pi_ref.probs(s)) / T::lit(2.0)).collect())
}

/// `E_{s ~ d_{pi_e}} [TV(pi(.|s), pi_e(.|s))]`.
pub fn expected_policy_tv<T: Scalar>(mdp: &TabularMdp<T>, pi_e: &TabularPolicy<T>, pi: &TabularPolicy<T>) -> Result<T> {
    pi.check_shape(mdp.n_states(), mdp.n_actions())?;
    let d_e = exact_state_distribution(mdp, pi_e)?;
    let per_state = per_state_tv(pi, pi_e)?;
    Ok(kahan_sum(d_e.iter().zip(&per_state).map(|(&d, &t)| d * t)).min(T::one()))
}

/// Feature map `phi(s, a)` stored row-major as `[s][a][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FeatureRows<T>", into = "FeatureRows<T>", bound = "T: Scalar")]
pub struct FeatureTable<T> {
    n_states: usize,
    n_actions: usize,
    dim: usize,
    values: Vec<T>,
}

/// JSON form: one feature vector per `(s, a)`, in `s * n_actions + a` order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureRows<T> {
    pub n_states: usize,
    pub n_actions: usize,
    pub rows: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<FeatureRows<T>> for FeatureTable<T> {
    type Error = Error;

    fn try_from(f: FeatureRows<T>) -> Result<Self> {
        let dim = f.rows.first().map_or(0, Vec::len);
        if f.rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("ragged feature rows".into()));
        }
        FeatureTable::new(f.n_states, f.n_actions, dim, f.rows.into_iter().flatten().collect())
    }
}

impl<T: Scalar> From<FeatureTable<T>> for FeatureRows<T> {
    fn from(f: FeatureTable<T>) -> Self {
        FeatureRows { n_states: f.n_states, n_actions: f.n_actions, rows: f.values.chunks(f.dim).map(<[T]>::to_vec).collect() }
    }
}

impl<T: Scalar> FeatureTable<T> {
    pub fn new(n_states: usize, n_actions: usize, dim: usize, values: Vec<T>) -> Result<Self> {
        if dim == 0 || n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidParameter("feature table needs positive dimensions".into()));
        }
        if values.len() != n_states * n_actions * dim {
            return Err(Error::DimensionMismatch(format!(
                "feature table has {} values, expected {}",
                values.len(),
                n_states * n_actions * dim
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite feature value".into()));
        }
        Ok(Self { n_states, n_actions, dim, values })
    }

    /// One-hot indicator of the state-action pair (`dim = n * k`).
    pub fn state_action_indicators(n_states: usize, n_actions: usize) -> Self {
        let nk = n_states * n_actions;
        let mut values = vec![T::zero(); nk * nk];
        for i in 0..nk {
            values[i * nk + i] = T::one();
        }
        Self { n_states, n_actions, dim: nk, values }
    }

    /// One-hot indicator of the state (`dim = n`).
    pub fn state_indicators(n_states: usize, n_actions: usize) -> Self {
        let mut values = vec![T::zero(); n_states * n_actions * n_states];
        for s in 0..n_states {
            for a in 0..n_actions {
                values[(s * n_actions + a) * n_states + s] = T::one();
            }
        }
        Self { n_states, n_actions, dim: n_states, values }
    }

    /// Single feature equal to the MDP reward.
    pub fn from_reward(mdp: &TabularMdp<T>) -> Self {
        Self { n_states: mdp.n_states(), n_actions: mdp.n_actions(), dim: 1, values: mdp.rewards().to_vec() }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn phi(&self, s: usize, a: usize) -> &[T] {
        self.row(s * self.n_actions + a)
    }

    #[inline]
    pub fn row(&self, sa: usize) -> &[T] {
        &self.values[sa * self.dim..(sa + 1) * self.dim]
    }

    /// `max_{s,a} ||phi(s,a)||_2`.
    pub fn max_row_norm(&self) -> T {
        self.values.chunks(self.dim).map(norm2).fold(T::zero(), T::max)
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    /// `Phi^T x` for a vector `x` over state-action pairs.
    pub fn expectation(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        for (sa, &w) in x.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            for (acc, &f) in out.iter_mut().zip(self.row(sa)) {
                *acc = *acc + w * f;
            }
        }
        out
    }

    /// `Phi w`: the linear function `(s, a) -> w . phi(s, a)` as a table.
    pub fn apply(&self, w: &[T]) -> Vec<T> {
        self.values.chunks(self.dim).map(|row| dot(row, w)).collect()
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm2<T: Scalar>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

/// Bounded discriminator class `D` over the state-action grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", bound = "T: Scalar")]
pub enum DiscriminatorClass<T> {
    /// Every function with `||D||_inf <= delta`.
    CompleteIndicator { delta: T },
    /// `D_w(s,a) = w . phi(s,a)` with `||w||_2 <= weight_norm_bound`.
    LinearFeature { delta: T, weight_norm_bound: T, features: FeatureTable<T> },
}

impl<T: Scalar> DiscriminatorClass<T> {
    pub fn complete(delta: T) -> Result<Self> {
        if !(delta > T::zero() && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        Ok(Self::CompleteIndicator { delta })
    }

    /// Linear class; requires `weight_norm_bound * max ||phi|| <= delta`.
    pub fn linear(features: FeatureTable<T>, weight_norm_bound: T, delta: T) -> Result<Self> {
        if !(delta > T::zero() && weight_norm_bound > T::zero()) {
            return Err(Error::InvalidParameter("delta and weight_norm_bound must be positive".into()));
        }
        let sup = weight_norm_bound * features.max_row_norm();
        if sup > delta * (T::one() + T::prob_tol()) {
            return Err(Error::InvalidParameter(format!(
                "linear class reaches {sup} in sup norm, above delta = {delta}"
            )));
        }
        Ok(Self::LinearFeature { delta, weight_norm_bound, features })
    }

    /// Linear class with the tightest admissible `delta`.
    pub fn linear_tight(features: FeatureTable<T>, weight_norm_bound: T) -> Result<Self> {
        let delta = weight_norm_bound * features.max_row_norm();
        Self::linear(features, weight_norm_bound, delta)
    }

    pub fn delta(&self) -> T {
        match self {
            Self::CompleteIndicator { delta } | Self::LinearFeature { delta, .. } => *delta,
        }
    }

    /// Same class with every function scaled by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        match self {
            Self::CompleteIndicator { delta } => Self::complete(*delta * factor),
            Self::LinearFeature { delta, weight_norm_bound, features } => {
                Self::linear(features.clone(), *weight_norm_bound * factor, *delta * factor)
            }
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::CompleteIndicator { .. } => "complete_indicator",
            Self::LinearFeature { .. } => "linear_feature",
        }
    }

    fn check_grid(&self, len: usize) -> Result<()> {
        if let Self::LinearFeature { features, .. } = self {
            if features.n_states * features.n_actions != len {
                return Err(Error::DimensionMismatch(format!(
                    "feature grid has {} pairs, distributions have {len}",
                    features.n_states * features.n_actions
                )));
            }
        }
        Ok(())
    }

    /// A maximizer of `E_mu[D] - E_nu[D]` over the class, as a table over pairs.
    pub fn best_response(&self, mu: &[T], nu: &[T]) -> Result<Vec<T>> {
        if mu.len() != nu.len() {
            return Err(Error::DimensionMismatch("distributions differ in length".into()));
        }
        self.check_grid(mu.len())?;
        Ok(match self {
            Self::CompleteIndicator { delta } => mu
                .iter()
                .zip(nu)
                .map(|(&a, &b)| {
                    if a > b {
                        *delta
                    } else if a < b {
                        -*delta
                    } else {
                        T::zero()
                    }
                })
                .collect(),
            Self::LinearFeature { weight_norm_bound, features, .. } => {
                let diff: Vec<T> = mu.iter().zip(nu).map(|(&a, &b)| a - b).collect();
                let g = features.expectation(&diff);
                let norm = norm2(&g);
                if norm > T::zero() {
                    let w: Vec<T> = g.iter().map(|&x| *weight_norm_bound * x / norm).collect();
                    features.apply(&w)
                } else {
                    vec![T::zero(); mu.len()]
                }
            }
        })
    }
}

/// `d_D(mu, nu) = sup_{D in class} E_mu[D] - E_nu[D]`, evaluated in closed form.
pub fn neural_net_distance<T: Scalar>(mu: &[T], nu: &[T], dclass: &DiscriminatorClass<T>) -> Result<T> {
    check_pair(mu, nu)?;
    dclass.check_grid(mu.len())?;
    Ok(match dclass {
        DiscriminatorClass::CompleteIndicator { delta } => *delta * l1_diff(mu, nu),
        DiscriminatorClass::LinearFeature { weight_norm_bound, features, .. } => {
            let diff: Vec<T> = mu.iter().zip(nu).map(|(&a, &b)| a - b).collect();
            *weight_norm_bound * norm2(&features.expectation(&diff))
        }
    })
}

/// One demonstration pair and the trajectory it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoPair {
    #[serde(rename = "s")]
    pub state: usize,
    #[serde(rename = "a")]
    pub action: usize,
    pub trajectory_id: usize,
}

/// Multiset of expert `(s, a)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoSet {
    pub pairs: Vec<DemoPair>,
    pub trajectory_count: usize,
    pub source_seed: u64,
}

impl DemoSet {
    pub fn new(pairs: Vec<DemoPair>, trajectory_count: usize, source_seed: u64) -> Result<Self> {
        if trajectory_count >= 1 && pairs.is_empty() {
            return Err(Error::Empty("demonstration pairs"));
        }
        Ok(Self { pairs, trajectory_count, source_seed })
    }

    /// Every step of every trajectory.
    pub fn from_trajectories<T: Scalar>(trajectories: &[Trajectory<T>], source_seed: u64) -> Result<Self> {
        let pairs = trajectories
            .iter()
            .enumerate()
            .flat_map(|(id, t)| t.steps.iter().map(move |st| DemoPair { state: st.state, action: st.action, trajectory_id: id }))
            .collect();
        Self::new(pairs, trajectories.len(), source_seed)
    }

    /// Reads the flat `[{"s", "a", "trajectory_id"}, ...]` record array.
    pub fn from_records(pairs: Vec<DemoPair>, source_seed: u64) -> Result<Self> {
        let mut ids: Vec<usize> = pairs.iter().map(|p| p.trajectory_id).collect();
        ids.sort_unstable();
        ids.dedup();
        Self::new(pairs, ids.len(), source_seed)
    }

    /// `m` i.i.d. draws from the discounted occupancy of `pi`.
    ///
    /// Each draw runs a fresh trajectory and keeps step `t`, where `t` follows
    /// the geometric law `(1 - gamma) gamma^t` truncated to `t < horizon`.
    pub fn discounted_resample<T: Scalar>(
        mdp: &TabularMdp<T>,
        pi: &TabularPolicy<T>,
        m: usize,
        horizon: usize,
        seed: u64,
    ) -> Result<Self> {
        pi.check_shape(mdp.n_states(), mdp.n_actions())?;
        if m == 0 || horizon == 0 {
            return Err(Error::InvalidParameter("need m >= 1 and horizon >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = mdp.gamma().as_f64();
        let tail = gamma.powi(horizon.min(i32::MAX as usize) as i32);
        let mut pairs = Vec::with_capacity(m);
        for id in 0..m {
            let u: f64 = rng.gen();
            let t = (((1.0 - u * (1.0 - tail)).ln() / gamma.ln()).floor() as usize).min(horizon - 1);
            let mut s = crate::mdp::sample::draw_index(&mut rng, mdp.init_dist());
            for _ in 0..t {
                let a = crate::mdp::sample::draw_index(&mut rng, pi.probs(s));
                s = crate::mdp::sample::draw_index(&mut rng, mdp.next_dist(s, a));
            }
            let a = crate::mdp::sample::draw_index(&mut rng, pi.probs(s));
            pairs.push(DemoPair { state: s, action: a, trajectory_id: id });
        }
        Self::new(pairs, m, seed)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn validate(&self, n_states: usize, n_actions: usize) -> Result<()> {
        if let Some(p) = self.pairs.iter().find(|p| p.state >= n_states || p.action >= n_actions) {
            return Err(Error::DimensionMismatch(format!(
                "pair ({}, {}) outside a {n_states}x{n_actions} grid",
                p.state, p.action
            )));
        }
        Ok(())
    }

    /// Flat index `s * n_actions + a` of every pair.
    pub fn indices(&self, n_actions: usize) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(move |p| p.state * n_actions + p.action)
    }
}

/// Normalized frequency table of the sample's pairs over the `n x k` grid.
pub fn empirical_occupancy<T: Scalar>(sample: &DemoSet, n_states: usize, n_actions: usize) -> Result<Vec<T>> {
    if sample.is_empty() {
        return Err(Error::Empty("demonstration pairs"));
    }
    sample.validate(n_states, n_actions)?;
    let mut counts = vec![0usize; n_states * n_actions];
    for i in sample.indices(n_actions) {
        counts[i] += 1;
    }
    let m = T::from_count(sample.len());
    Ok(counts.into_iter().map(|c| T::from_count(c) / m).collect())
}

/// Discount-weighted occupancy estimate from whole trajectories: step `t` of
/// a trajectory of length `L` gets weight `gamma^t (1 - gamma) / (1 - gamma^L)`,
/// and trajectories are averaged.
pub fn discounted_empirical_occupancy<T: Scalar>(
    trajectories: &[Trajectory<T>],
    gamma: T,
    n_states: usize,
    n_actions: usize,
) -> Result<Vec<T>> {
    if trajectories.iter().all(Trajectory::is_empty) {
        return Err(Error::Empty("trajectories"));
    }
    let used: Vec<&Trajectory<T>> = trajectories.iter().filter(|t| !t.is_empty()).collect();
    let mut rho = vec![T::zero(); n_states * n_actions];
    let per_traj = T::one() / T::from_count(used.len());
    for t in used {
        let len = t.len();
        let norm = (T::one() - gamma) / (T::one() - gamma.powi(len as i32));
        let mut w = norm * per_traj;
        for st in &t.steps {
            if st.state >= n_states || st.action >= n_actions {
                return Err(Error::DimensionMismatch(format!("step ({}, {}) outside the grid", st.state, st.action)));
            }
            let i = st.state * n_actions + st.action;
            rho[i] = rho[i] + w;
            w = w * gamma;
        }
    }
    let total = kahan_sum(rho.iter().copied());
    Ok(rho.into_iter().map(|x| x / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RademacherEstimate<T> {
    pub estimate: T,
    pub std_error: T,
}

/// Supremum of `(1/m) sum_i sigma_i D(X_i)` over the class for one sign vector.
pub fn rademacher_sup<T: Scalar>(dclass: &DiscriminatorClass<T>, indices: &[usize], signs: &[i8]) -> T {
    let m = T::from_count(indices.len());
    match dclass {
        DiscriminatorClass::CompleteIndicator { delta } => {
            let mut sums: std::collections::BTreeMap<usize, i64> = std::collections::BTreeMap::new();
            for (&x, &s) in indices.iter().zip(signs) {
                *sums.entry(x).or_default() += s as i64;
            }
            let total: i64 = sums.values().map(|v| v.abs()).sum();
            *delta * T::from_i64(total).expect("integer fits scalar") / m
        }
        DiscriminatorClass::LinearFeature { weight_norm_bound, features, .. } => {
            let mut acc = vec![T::zero(); features.dim()];
            for (&x, &s) in indices.iter().zip(signs) {
                let sign = if s > 0 { T::one() } else { -T::one() };
                for (a, &f) in acc.iter_mut().zip(features.row(x)) {
                    *a = *a + sign * f;
                }
            }
            *weight_norm_bound * norm2(&acc) / m
        }
    }
}

/// Monte Carlo estimate of the empirical Rademacher complexity
/// `E_sigma [sup_D (1/m) sum_i sigma_i D(X_i)]` on the sample.
pub fn empirical_rademacher<T: Scalar>(
    dclass: &DiscriminatorClass<T>,
    sample: &DemoSet,
    sigma_draws: usize,
    seed: u64,
) -> Result<RademacherEstimate<T>> {
    if sample.is_empty() {
        return Err(Error::Empty("demonstration pairs"));
    }
    if sigma_draws == 0 {
        return Err(Error::InvalidParameter("sigma_draws must be at least 1".into()));
    }
    let n_actions = match dclass {
        DiscriminatorClass::LinearFeature { features, .. } => {
            sample.validate(features.n_states(), features.n_actions())?;
            features.n_actions()
        }
        DiscriminatorClass::CompleteIndicator { .. } => {
            sample.pairs.iter().map(|p| p.action).max().unwrap_or(0) + 1
        }
    };
    let indices: Vec<usize> = sample.indices(n_actions).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut signs = vec![0i8; indices.len()];
    let mut values = Vec::with_capacity(sigma_draws);
    for _ in 0..sigma_draws {
        for s in signs.iter_mut() {
            *s = if rng.gen::<bool>() { 1 } else { -1 };
        }
        values.push(rademacher_sup(dclass, &indices, &signs));
    }
    let n = T::from_count(sigma_draws);
    let mean = kahan_sum(values.iter().copied()) / n;
    let std_error = if sigma_draws < 2 {
        T::zero()
    } else {
        let var = kahan_sum(values.iter().map(|&v| (v - mean) * (v - mean))) / (n - T::one());
        (var / n).sqrt()
    };
    Ok(RademacherEstimate { estimate: mean, std_error })
}

/// Exact Rademacher complexity of the complete class on a sample:
/// `(delta/m) sum_x E|S_{n_x}|` with `S_n` a sum of `n` independent signs.
pub fn rademacher_complete_exact<T: Scalar>(delta: T, sample: &DemoSet) -> Result<T> {
    if sample.is_empty() {
        return Err(Error::Empty("demonstration pairs"));
    }
    let mut counts: std::collections::BTreeMap<(usize, usize), usize> = std::collections::BTreeMap::new();
    for p in &sample.pairs {
        *counts.entry((p.state, p.action)).or_default() += 1;
    }
    let total: f64 = counts.values().map(|&n| expected_abs_sign_sum(n)).sum();
    Ok(delta * T::lit(total) / T::from_count(sample.len()))
}

/// `E|sigma_1 + ... + sigma_n|` for independent Rademacher signs.
fn expected_abs_sign_sum(n: usize) -> f64 {
    // sum_j C(n, j) |2j - n| / 2^n, accumulated in log space for large n
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let mut ln_binom = 0.0f64;
    let mut acc = 0.0;
    for j in 0..=n {
        if j > 0 {
            ln_binom += ((n - j + 1) as f64).ln() - (j as f64).ln();
        }
        let dev = (2 * j) as f64 - n as f64;
        if dev != 0.0 {
            acc += (ln_binom + ln_half_n).exp() * dev.abs();
        }
    }
    acc
}

/// `||log(rho_pi / rho_e)||_{D,1}` for the complete class, expressed in the
/// indicator basis `{delta * 1_(s,a)}`: the minimal `sum |w_i|` is
/// `(1/delta) sum |f - median(f)|` with the lower median as offset.
pub fn lambda_complexity<T: Scalar>(
    rho_pi: &OccupancyMeasure<T>,
    rho_e: &OccupancyMeasure<T>,
    dclass: &DiscriminatorClass<T>,
) -> Result<T> {
    let delta = match dclass {
        DiscriminatorClass::CompleteIndicator { delta } => *delta,
        DiscriminatorClass::LinearFeature { .. } => {
            return Err(Error::UnsupportedClass("lambda complexity needs the spanning complete_indicator class"))
        }
    };
    let (p, q) = (rho_pi.state_action_dist(), rho_e.state_action_dist());
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch("occupancies differ in shape".into()));
    }
    let mut f = Vec::with_capacity(p.len());
    for (i, (&a, &b)) in p.iter().zip(q).enumerate() {
        if !(a > T::zero()) || !(b > T::zero()) {
            return Err(Error::NonPositiveDensity(i));
        }
        f.push(a.ln() - b.ln());
    }
    Ok(l1_to_lower_median(&f) / delta)
}

/// `sum_i |f_i - med|` with `med` the lower median.
pub(crate) fn l1_to_lower_median<T: Scalar>(f: &[T]) -> T {
    let mut sorted = f.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite log ratios"));
    let med = sorted[(sorted.len() - 1) / 2];
    kahan_sum(f.iter().map(|&x| (x - med).abs()))
}
