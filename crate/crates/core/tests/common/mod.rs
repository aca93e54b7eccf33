#![allow(dead_code)]

use ilgap_core::mdp::{make_environment, CliffGridParams, EnvKind, EnvSpec, TabularMdp, TabularPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_mdp(n: usize, k: usize, gamma: f64, seed: u64) -> TabularMdp<f64> {
    make_environment(&EnvSpec::new(EnvKind::Random { n_states: n, n_actions: k, branching: None }, gamma, seed)).unwrap()
}

pub fn sparse_mdp(n: usize, k: usize, branching: usize, gamma: f64, seed: u64) -> TabularMdp<f64> {
    make_environment(&EnvSpec::new(
        EnvKind::Random { n_states: n, n_actions: k, branching: Some(branching) },
        gamma,
        seed,
    ))
    .unwrap()
}

pub fn cliff(width: usize, height: usize, slip: f64, gamma: f64) -> TabularMdp<f64> {
    make_environment(&EnvSpec::new(EnvKind::CliffGrid(CliffGridParams::new(width, height, slip)), gamma, 0)).unwrap()
}

pub fn random_distribution(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Policy with Dirichlet(1) rows; strictly positive almost surely.
pub fn random_policy(n: usize, k: usize, seed: u64) -> TabularPolicy<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs: Vec<f64> = (0..n).flat_map(|_| random_distribution(&mut rng, k)).collect();
    TabularPolicy::new(n, k, probs).unwrap()
}

pub fn random_deterministic_policy(n: usize, k: usize, seed: u64) -> TabularPolicy<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actions: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    TabularPolicy::deterministic(&actions, k).unwrap()
}

/// Softmax of the optimal Q-values at temperature `temp`: a strictly positive
/// near-expert policy.
pub fn softmax_expert(mdp: &TabularMdp<f64>, temp: f64) -> TabularPolicy<f64> {
    let pi = ilgap_core::mdp::optimal_policy(mdp, 1e-10).unwrap();
    let v = ilgap_core::mdp::policy_evaluation(mdp, &pi).unwrap();
    let q = ilgap_core::mdp::q_values(mdp, &v);
    let k = mdp.n_actions();
    let mut probs = Vec::with_capacity(q.len());
    for row in q.chunks(k) {
        let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = row.iter().map(|x| ((x - best) / temp).exp()).collect();
        let total: f64 = w.iter().sum();
        probs.extend(w.into_iter().map(|x| x / total));
    }
    TabularPolicy::new(mdp.n_states(), k, probs).unwrap()
}

pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
