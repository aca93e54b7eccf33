//! Batch certification: every deterministic check over a grid of generated
//! and user-supplied instances, plus the resampling checks.

use ilgap_core::bounds::{
    check_eq14, check_gail_generalization, check_lemma1, check_lemma2, check_lemma3, check_lemma4_generalization,
    check_lemma6, check_pinsker, check_theorem1, check_theorem1_kl, check_theorem3, BoundContext, BoundId, TrialParams,
};
use ilgap_core::divergences::{discounted_empirical_occupancy, DemoSet, DiscriminatorClass};
use ilgap_core::learners::{bc_fit, gail_train, GailConfig};
use ilgap_core::mdp::{
    derive_seed, make_environment, occupancy, optimal_policy, sample_trajectories, softmax_optimal_policy,
    CliffGridParams, EnvKind, EnvSpec, TabularMdp, DEFAULT_RL_TOL,
};
use ilgap_core::{BoundReport, Policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{build_environment, Algorithm, BoundSuiteConfig};
use crate::error::{HarnessError, Result};

/// Per-bound aggregate written to the summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub bound_id: BoundId,
    pub instances: usize,
    pub min_slack: f64,
    pub violation_rate: f64,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub summary: Vec<SummaryRow>,
    pub reports: Vec<BoundReport>,
    /// Instances the deterministic checks ran on.
    pub instances: usize,
    /// Failed reports among the bounds that must always hold.
    pub deterministic_violations: usize,
}

impl SuiteResult {
    pub fn row(&self, id: BoundId) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.bound_id == id)
    }

    /// `Err` with exit code 3 when any deterministic bound failed.
    pub fn check(&self) -> Result<()> {
        let mut failed = self.reports.iter().filter(|r| r.bound_id.is_deterministic() && !r.holds);
        match failed.next() {
            None => Ok(()),
            Some(first) => Err(HarnessError::Violation {
                count: self.deterministic_violations,
                first: format!("{} lhs {} rhs {} ({:?})", first.bound_id, first.lhs, first.rhs, first.context),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairKind {
    Random,
    Learned(Algorithm),
}

struct Instance {
    label: String,
    mdp: TabularMdp<f64>,
    /// Generator seed; `None` for explicit MDPs.
    mdp_seed: Option<u64>,
    pair: PairKind,
    /// Seed of the policy pair.
    seed: u64,
}

/// Generated MDP `i`: every fourth a cliff grid that fits `max_states`, the
/// rest random with sizes cycling through the allowed range (every fifth of
/// those with sparse transitions).
fn generated_mdp(config: &BoundSuiteConfig, i: usize) -> Result<(String, TabularMdp<f64>)> {
    let gamma = config.gammas[i % config.gammas.len()];
    let seed = generated_mdp_seed(config, i);
    let cliffs: Vec<(usize, usize)> =
        [(4, 5), (3, 4), (6, 3), (5, 4)].into_iter().filter(|(w, h)| w * h <= config.max_states).collect();
    if i % 4 == 3 && !cliffs.is_empty() {
        let (w, h) = cliffs[(i / 4) % cliffs.len()];
        let spec = EnvSpec::new(EnvKind::CliffGrid(CliffGridParams::new(w, h, 0.1)), gamma, seed);
        return Ok((format!("cliff {w}x{h}"), make_environment(&spec)?));
    }
    let n = 2 + (i * 7) % (config.max_states - 1);
    let k = 1 + (i * 3) % config.max_actions;
    let branching = i.is_multiple_of(5).then_some(1 + n / 3);
    let spec = EnvSpec::new(EnvKind::Random { n_states: n, n_actions: k, branching }, gamma, seed);
    Ok((format!("random n={n} k={k}"), make_environment(&spec)?))
}

fn generated_mdp_seed(config: &BoundSuiteConfig, i: usize) -> u64 {
    derive_seed(config.seed, i as u64)
}

fn instances(config: &BoundSuiteConfig) -> Result<Vec<Instance>> {
    let mut kinds = vec![PairKind::Random];
    kinds.extend(config.algorithms.iter().map(|&a| PairKind::Learned(a)));
    let mut out = Vec::new();
    for i in 0..config.instances {
        let (label, mdp) = generated_mdp(config, i)?;
        let pair = kinds[(i / config.gammas.len().max(1)) % kinds.len()];
        let (mdp_seed, seed) = (Some(generated_mdp_seed(config, i)), derive_seed(config.seed ^ 0x5EED, i as u64));
        out.push(Instance { label, mdp, mdp_seed, pair, seed });
    }
    for (j, mdp) in config.explicit_instances()?.into_iter().enumerate() {
        for (p, &pair) in kinds.iter().enumerate() {
            let seed = derive_seed(config.seed ^ 0xE5, (j * kinds.len() + p) as u64);
            out.push(Instance { label: format!("explicit_mdps[{j}]"), mdp: mdp.clone(), mdp_seed: None, pair, seed });
        }
    }
    Ok(out)
}

/// Policy with Dirichlet(1) rows, strictly positive almost surely.
fn random_policy(n: usize, k: usize, seed: u64) -> Result<Policy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probs = Vec::with_capacity(n * k);
    for _ in 0..n {
        let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-12).collect();
        let total: f64 = raw.iter().sum();
        probs.extend(raw.into_iter().map(|x| x / total));
    }
    Ok(Policy::new(n, k, probs)?)
}

fn policy_pair(inst: &Instance) -> Result<(Policy, Policy)> {
    let (mdp, seed) = (&inst.mdp, inst.seed);
    let (n, k) = (mdp.n_states(), mdp.n_actions());
    Ok(match inst.pair {
        PairKind::Random => (random_policy(n, k, seed)?, random_policy(n, k, derive_seed(seed, 1))?),
        PairKind::Learned(Algorithm::Bc) => {
            let expert = optimal_policy(mdp, DEFAULT_RL_TOL)?;
            let trajs = sample_trajectories(mdp, &expert, 30, 3, seed)?;
            let bc = bc_fit(&DemoSet::from_trajectories(&trajs, seed)?, n, k)?;
            (expert, bc)
        }
        PairKind::Learned(_) => {
            let expert = optimal_policy(mdp, DEFAULT_RL_TOL)?;
            let trajs = sample_trajectories(mdp, &expert, 100, 5, seed)?;
            let rho_hat = discounted_empirical_occupancy(&trajs, mdp.gamma(), n, k)?;
            let config = GailConfig::new(DiscriminatorClass::complete(1.0)?, 30);
            (expert, gail_train(mdp, &rho_hat, &config, seed)?.final_policy)
        }
    })
}

fn deterministic_reports(inst: &Instance) -> Result<Vec<BoundReport>> {
    let mdp = &inst.mdp;
    let (pi_e, pi) = policy_pair(inst)?;
    let p = occupancy(mdp, &pi)?;
    let q = occupancy(mdp, &pi_e)?;
    let (pd, qd) = (p.state_action_dist(), q.state_action_dist());
    let mut out = vec![
        check_lemma1(mdp, &pi_e, &pi)?,
        check_lemma2(mdp, &pi_e, &pi)?,
        check_lemma3(mdp, &pi_e, &pi)?,
        check_theorem1(mdp, &pi_e, &pi)?,
        check_theorem1_kl(mdp, &pi_e, &pi)?,
        check_theorem3(mdp, &pi_e, &pi)?,
        check_eq14(pd, qd)?,
        check_pinsker(pd, qd)?,
    ];
    let (left, right) = check_lemma6(&p, &q, &DiscriminatorClass::complete(1.0)?)?;
    out.push(left);
    out.extend(right);
    let pair = match inst.pair {
        PairKind::Random => "random/random".to_string(),
        PairKind::Learned(a) => format!("expert/{a}"),
    };
    for r in &mut out {
        let note = r.context.note.take();
        r.context = BoundContext {
            mdp_seed: inst.mdp_seed,
            gamma: Some(mdp.gamma()),
            policies: Some(pair.clone()),
            note: Some(match note {
                Some(n) => format!("{}; pair seed {}; {n}", inst.label, inst.seed),
                None => format!("{}; pair seed {}", inst.label, inst.seed),
            }),
            ..r.context.clone()
        };
    }
    Ok(out)
}

fn probabilistic_reports(config: &BoundSuiteConfig) -> Result<Vec<BoundReport>> {
    let p = &config.probabilistic;
    let mut out = Vec::new();
    let params = |trials: usize, stream: u64| TrialParams {
        horizon: p.horizon,
        ..TrialParams::new(p.m, p.delta, trials, derive_seed(config.seed, stream))
    };

    let mdp = build_environment(&p.lemma4_environment, p.lemma4_environment.gamma)?;
    let expert = optimal_policy(&mdp, DEFAULT_RL_TOL)?;
    out.extend(check_lemma4_generalization(&mdp, &expert, &params(p.lemma4_trials, 0x4))?.reports);

    let mdp = build_environment(&p.gail_environment, p.gail_environment.gamma)?;
    let expert = softmax_optimal_policy(&mdp, p.expert_temperature, DEFAULT_RL_TOL)?;
    let gail = GailConfig::new(DiscriminatorClass::complete(1.0)?, p.gail_iterations);
    let outcome = check_gail_generalization(&mdp, &expert, &gail, &params(p.gail_trials, 0x5))?;
    out.extend(outcome.lemma5.reports);
    out.extend(outcome.lemma7.reports);
    out.extend(outcome.theorem5.reports);
    Ok(out)
}

/// Aggregates reports per bound in the fixed [`BoundId::ALL`] order.
pub fn summarize(reports: &[BoundReport]) -> Vec<SummaryRow> {
    BoundId::ALL
        .iter()
        .filter_map(|&id| {
            let of_id: Vec<&BoundReport> = reports.iter().filter(|r| r.bound_id == id).collect();
            if of_id.is_empty() {
                return None;
            }
            let failed = of_id.iter().filter(|r| !r.holds).count();
            Some(SummaryRow {
                bound_id: id,
                instances: of_id.len(),
                min_slack: of_id.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
                violation_rate: failed as f64 / of_id.len() as f64,
            })
        })
        .collect()
}

/// Runs the suite. Deterministic violations are reported in the result, not
/// as an error; call [`SuiteResult::check`] to turn them into exit code 3.
pub fn run_bound_suite(config: &BoundSuiteConfig) -> Result<SuiteResult> {
    config.validate()?;
    let all = instances(config)?;
    let per_instance: Vec<Vec<BoundReport>> = all.par_iter().map(deterministic_reports).collect::<Result<_>>()?;
    let mut reports: Vec<BoundReport> = per_instance.into_iter().flatten().collect();
    if config.probabilistic.enabled {
        reports.extend(probabilistic_reports(config)?);
    }
    let deterministic_violations = reports.iter().filter(|r| r.bound_id.is_deterministic() && !r.holds).count();
    Ok(SuiteResult { summary: summarize(&reports), reports, instances: all.len(), deterministic_violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProbabilisticSettings;

    fn small() -> BoundSuiteConfig {
        BoundSuiteConfig {
            instances: 12,
            probabilistic: ProbabilisticSettings { enabled: false, ..ProbabilisticSettings::default() },
            ..BoundSuiteConfig::default()
        }
    }

    #[test]
    fn small_suite_has_no_violations() {
        let result = run_bound_suite(&small()).unwrap();
        assert_eq!(result.instances, 12);
        assert_eq!(result.deterministic_violations, 0);
        result.check().unwrap();
        assert_eq!(result.row(BoundId::Lemma1).unwrap().instances, 12);
    }

    #[test]
    fn generated_sizes_respect_limits() {
        let config = BoundSuiteConfig { max_states: 6, max_actions: 2, instances: 40, ..small() };
        for i in 0..40 {
            let (_, mdp) = generated_mdp(&config, i).unwrap();
            assert!(mdp.n_states() <= 6 && mdp.n_actions() <= 2);
        }
    }

    #[test]
    fn empty_algorithm_list_keeps_random_pairs() {
        let result = run_bound_suite(&BoundSuiteConfig { algorithms: vec![], ..small() }).unwrap();
        assert_eq!(result.instances, 12);
        assert_eq!(result.deterministic_violations, 0);
    }

    #[test]
    fn summary_tracks_worst_slack() {
        let mk = |slack: f64| BoundReport::new(BoundId::Pinsker, 0.0, slack, BoundContext::default());
        let rows = summarize(&[mk(0.5), mk(-1.0), mk(2.0)]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].min_slack, -1.0);
        assert!((rows[0].violation_rate - 1.0 / 3.0).abs() < 1e-15);
    }
}
