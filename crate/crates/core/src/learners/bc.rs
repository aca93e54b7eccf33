use crate::divergences::DemoSet;
use crate::error::{Error, Result};
use crate::mdp::TabularPolicy;
use crate::scalar::Scalar;

/// Maximum-likelihood tabular policy: `pi(a|s) = count(s,a) / count(s)` on
/// visited states, uniform elsewhere.
pub fn bc_fit<T: Scalar>(demos: &DemoSet, n_states: usize, n_actions: usize) -> Result<TabularPolicy<T>> {
    if demos.is_empty() {
        return Err(Error::Empty("demonstration pairs"));
    }
    demos.validate(n_states, n_actions)?;
    let mut counts = vec![T::zero(); n_states * n_actions];
    for i in demos.indices(n_actions) {
        counts[i] = counts[i] + T::one();
    }
    TabularPolicy::from_weights(n_states, n_actions, &counts)
}

/// Fraction of pairs where the greedy action of `pi` differs from the demonstrated one.
pub fn bc_01_loss<T: Scalar>(pi: &TabularPolicy<T>, demos: &DemoSet) -> Result<T> {
    if demos.is_empty() {
        return Err(Error::Empty("demonstration pairs"));
    }
    demos.validate(pi.n_states(), pi.n_actions())?;
    let greedy = pi.greedy_actions();
    let misses = demos.pairs.iter().filter(|p| greedy[p.state] != p.action).count();
    Ok(T::from_count(misses) / T::from_count(demos.len()))
}

/// Empirical negative log-likelihood `-(1/m) sum_i ln pi(a_i | s_i)`.
pub fn bc_negative_log_likelihood<T: Scalar>(pi: &TabularPolicy<T>, demos: &DemoSet) -> Result<T> {
    if demos.is_empty() {
        return Err(Error::Empty("demonstration pairs"));
    }
    demos.validate(pi.n_states(), pi.n_actions())?;
    let total: T = demos.pairs.iter().map(|p| -pi.prob(p.state, p.action).ln()).sum();
    Ok(total / T::from_count(demos.len()))
}
