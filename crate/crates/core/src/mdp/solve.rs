//! Exact linear-algebra solvers: occupancy measures, policy values and the
//! optimal-policy oracle.

use crate::error::{Error, Result};
use crate::linalg::{solve_checked, SquareMatrix};
use crate::scalar::{kahan_sum, Scalar};

use super::{OccupancyMeasure, TabularMdp, TabularPolicy};

/// Default Bellman-residual tolerance for the optimal-policy oracle.
pub const DEFAULT_RL_TOL: f64 = 1e-10;

const MAX_POLICY_ITERATIONS: usize = 10_000;

/// State-to-state kernel `P_pi[s][s'] = sum_a pi(a|s) P[s][a][s']` (row-stochastic).
pub fn policy_transition_matrix<T: Scalar>(mdp: &TabularMdp<T>, pi: &TabularPolicy<T>) -> Result<SquareMatrix<T>> {
    pi.check_shape(mdp.n_states(), mdp.n_actions())?;
    let n = mdp.n_states();
    let mut m = SquareMatrix::zeros(n);
    for s in 0..n {
        for a in 0..mdp.n_actions() {
            let w = pi.prob(s, a);
            if w == T::zero() {
                continue;
            }
            for (s2, &p) in mdp.next_dist(s, a).iter().enumerate() {
                if p != T::zero() {
                    m.set(s, s2, m.get(s, s2) + w * p);
                }
            }
        }
    }
    Ok(m)
}

fn residual_gate<T: Scalar>(what: &str, residual: T) -> Result<()> {
    if !(residual <= T::solve_tol()) {
        return Err(Error::SolverFailure(format!("{what}: residual {residual} exceeds {}", T::solve_tol())));
    }
    Ok(())
}

fn clamp_noise<T: Scalar>(xs: &mut [T]) {
    for x in xs.iter_mut() {
        if *x < T::zero() && *x > -T::solve_tol() {
            *x = T::zero();
        }
    }
}

/// Discounted state distribution `d = (1 - gamma) (I - gamma P_pi^T)^{-1} d0`.
pub fn exact_state_distribution<T: Scalar>(mdp: &TabularMdp<T>, pi: &TabularPolicy<T>) -> Result<Vec<T>> {
    let p_pi = policy_transition_matrix(mdp, pi)?;
    let gamma = mdp.gamma();
    let a = p_pi.transpose().identity_minus_scaled(gamma);
    let b: Vec<T> = mdp.init_dist().iter().map(|&x| (T::one() - gamma) * x).collect();
    let (mut d, residual) = solve_checked(&a, &b)?;
    residual_gate("state distribution", residual)?;
    clamp_noise(&mut d);
    if let Some(i) = d.iter().position(|&x| x < T::zero()) {
        return Err(Error::SolverFailure(format!("negative state mass {} at state {i}", d[i])));
    }
    Ok(d)
}

/// Discounted state-action occupancy `rho(s,a) = d(s) pi(a|s)`.
pub fn occupancy<T: Scalar>(mdp: &TabularMdp<T>, pi: &TabularPolicy<T>) -> Result<OccupancyMeasure<T>> {
    let d = exact_state_distribution(mdp, pi)?;
    let k = mdp.n_actions();
    let mut rho = Vec::with_capacity(d.len() * k);
    for (s, &ds) in d.iter().enumerate() {
        rho.extend(pi.probs(s).iter().map(|&p| ds * p));
    }
    Ok(OccupancyMeasure::from_parts_unchecked(mdp.n_states(), k, d, rho))
}

/// `V^pi = E_{rho_pi}[r] / (1 - gamma)`.
pub fn policy_value_exact<T: Scalar>(mdp: &TabularMdp<T>, pi: &TabularPolicy<T>) -> Result<T> {
    let occ = occupancy(mdp, pi)?;
    let expected = kahan_sum(occ.state_action_dist().iter().zip(mdp.rewards()).map(|(&p, &r)| p * r));
    Ok(expected / (T::one() - mdp.gamma()))
}

/// State values of `pi` from the Bellman system `(I - gamma P_pi) v = r_pi`.
pub fn policy_evaluation<T: Scalar>(mdp: &TabularMdp<T>, pi: &TabularPolicy<T>) -> Result<Vec<T>> {
    evaluate_with_reward(mdp, mdp.rewards(), pi)
}

pub(crate) fn evaluate_with_reward<T: Scalar>(mdp: &TabularMdp<T>, reward: &[T], pi: &TabularPolicy<T>) -> Result<Vec<T>> {
    let p_pi = policy_transition_matrix(mdp, pi)?;
    let k = mdp.n_actions();
    let r_pi: Vec<T> = (0..mdp.n_states())
        .map(|s| kahan_sum(pi.probs(s).iter().zip(&reward[s * k..(s + 1) * k]).map(|(&p, &r)| p * r)))
        .collect();
    let a = p_pi.identity_minus_scaled(mdp.gamma());
    let (v, residual) = solve_checked(&a, &r_pi)?;
    let scale = r_pi.iter().fold(T::one(), |m, r| m.max(r.abs()));
    residual_gate("policy evaluation", residual / scale)?;
    Ok(v)
}

/// `d0 . v` where `v` solves the Bellman evaluation system.
pub fn policy_value_bellman<T: Scalar>(mdp: &TabularMdp<T>, pi: &TabularPolicy<T>) -> Result<T> {
    let v = policy_evaluation(mdp, pi)?;
    Ok(kahan_sum(mdp.init_dist().iter().zip(&v).map(|(&d, &x)| d * x)))
}

/// `Q(s,a) = r(s,a) + gamma sum_s' P[s][a][s'] v(s')`, flattened `[s][a]`.
pub fn q_values<T: Scalar>(mdp: &TabularMdp<T>, values: &[T]) -> Vec<T> {
    q_with_reward(mdp, mdp.rewards(), values)
}

fn q_with_reward<T: Scalar>(mdp: &TabularMdp<T>, reward: &[T], values: &[T]) -> Vec<T> {
    let (n, k) = (mdp.n_states(), mdp.n_actions());
    let mut q = Vec::with_capacity(n * k);
    for s in 0..n {
        for a in 0..k {
            let next = mdp.next_dist(s, a).iter().zip(values).fold(T::zero(), |acc, (&p, &v)| acc + p * v);
            q.push(reward[s * k + a] + mdp.gamma() * next);
        }
    }
    q
}

/// Lowest-index action whose Q-value is within `tol` of the best one.
fn tie_broken_greedy<T: Scalar>(q_row: &[T], tol: T) -> usize {
    let best = q_row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    q_row.iter().position(|&v| v >= best - tol).unwrap_or(0)
}

/// Deterministic optimal policy, ties broken by lowest action index.
///
/// Runs Howard policy iteration with exact evaluation; an action only
/// replaces the incumbent when it improves Q by more than `tol` (scaled by the
/// value magnitude), so on termination the Bellman residual is at most that
/// tolerance.
pub fn optimal_policy<T: Scalar>(mdp: &TabularMdp<T>, tol: T) -> Result<TabularPolicy<T>> {
    best_response(mdp, mdp.rewards(), tol)
}

/// Boltzmann policy over the optimal Q-values: `pi(a|s) ~ exp((Q*(s,a) - max_a Q*(s,.)) / temperature)`.
/// Strictly positive for finite Q, and greedy in the zero-temperature limit.
pub fn softmax_optimal_policy<T: Scalar>(mdp: &TabularMdp<T>, temperature: T, tol: T) -> Result<TabularPolicy<T>> {
    if !(temperature > T::zero()) || !temperature.is_finite() {
        return Err(Error::InvalidParameter(format!("temperature must be positive and finite, got {temperature}")));
    }
    let greedy = optimal_policy(mdp, tol)?;
    let q = q_values(mdp, &policy_evaluation(mdp, &greedy)?);
    let k = mdp.n_actions();
    let mut probs = Vec::with_capacity(q.len());
    for row in q.chunks(k) {
        let best = row.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
        let weights: Vec<T> = row.iter().map(|&x| ((x - best) / temperature).exp()).collect();
        let total = kahan_sum(weights.iter().copied());
        probs.extend(weights.into_iter().map(|w| w / total));
    }
    TabularPolicy::new(mdp.n_states(), k, probs)
}

/// Optimal deterministic policy for the dynamics of `mdp` under `reward`.
pub(crate) fn best_response<T: Scalar>(mdp: &TabularMdp<T>, reward: &[T], tol: T) -> Result<TabularPolicy<T>> {
    Ok(best_response_with_values(mdp, reward, tol)?.0)
}

/// Like [`best_response`], also returning the optimal state values.
pub(crate) fn best_response_with_values<T: Scalar>(
    mdp: &TabularMdp<T>,
    reward: &[T],
    tol: T,
) -> Result<(TabularPolicy<T>, Vec<T>)> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let (n, k) = (mdp.n_states(), mdp.n_actions());
    if reward.len() != n * k {
        return Err(Error::DimensionMismatch(format!("reward has {} entries, expected {}", reward.len(), n * k)));
    }
    let mut actions: Vec<usize> = (0..n).map(|s| tie_broken_greedy(&reward[s * k..(s + 1) * k], T::zero())).collect();
    for _ in 0..MAX_POLICY_ITERATIONS {
        let pi = TabularPolicy::deterministic(&actions, k)?;
        let v = evaluate_with_reward(mdp, reward, &pi)?;
        let q = q_with_reward(mdp, reward, &v);
        let scale = v.iter().fold(T::one(), |m, x| m.max(x.abs()));
        let step_tol = tol * scale;
        let mut changed = false;
        for s in 0..n {
            let row = &q[s * k..(s + 1) * k];
            let best = row.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
            if best > row[actions[s]] + step_tol {
                actions[s] = tie_broken_greedy(row, T::zero());
                changed = true;
            }
        }
        if !changed {
            let final_actions: Vec<usize> = (0..n).map(|s| tie_broken_greedy(&q[s * k..(s + 1) * k], step_tol)).collect();
            let pi = TabularPolicy::deterministic(&final_actions, k)?;
            return Ok((pi, v));
        }
    }
    Err(Error::SolverFailure("policy iteration did not terminate".into()))
}

/// Plain value iteration: returns the value estimate and its greedy policy once
/// successive iterates differ by at most `tol` in max norm.
pub fn value_iteration<T: Scalar>(mdp: &TabularMdp<T>, tol: T, max_iter: usize) -> Result<(Vec<T>, TabularPolicy<T>)> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let (n, k) = (mdp.n_states(), mdp.n_actions());
    let mut v = vec![T::zero(); n];
    for _ in 0..max_iter {
        let q = q_values(mdp, &v);
        let next: Vec<T> = q.chunks(k).map(|row| row.iter().fold(T::neg_infinity(), |m, &x| m.max(x))).collect();
        let delta = next.iter().zip(&v).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        v = next;
        if delta <= tol {
            let q = q_values(mdp, &v);
            let actions: Vec<usize> = q.chunks(k).map(|row| tie_broken_greedy(row, tol)).collect();
            return Ok((v, TabularPolicy::deterministic(&actions, k)?));
        }
    }
    Err(Error::SolverFailure(format!("value iteration did not reach {tol} in {max_iter} sweeps")))
}
