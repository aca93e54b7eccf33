//! Horizon and sample-complexity sweeps over (algorithm, gamma, m, seed) cells.
//!
//! Cells sharing (gamma, m, seed) share one demonstration sample and run
//! together; groups run in parallel and are reassembled in a fixed order, so
//! the output depends only on the configuration.

use std::time::Instant;

use ilgap_core::bounds::extended_float;
use ilgap_core::bounds::formulas;
use ilgap_core::divergences::{expected_policy_tv, js, lambda_complexity, rademacher_complete_exact};
use ilgap_core::learners::bc_01_loss;
use ilgap_core::mdp::{
    derive_seed, monte_carlo_value, occupancy, optimal_policy, policy_value_exact, sample_trajectories, OccupancyMeasure,
    TabularMdp, DEFAULT_RL_TOL,
};
use ilgap_core::{Error as CoreError, Policy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{build_environment, Algorithm, SweepConfig, SweepKind};
use crate::error::Result;
use crate::stats::{log_log_slope, median, quantile, resample_rows, seed_bootstrap, BOOTSTRAP_RESAMPLES, GAP_FLOOR};
use crate::training::{complete_class, train, Demonstrations};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// Truncation bias above which a warning is emitted.
pub const TRUNCATION_WARN_LEVEL: f64 = 1e-3;

/// One (algorithm, gamma, m, seed) cell. Failed cells keep their coordinates,
/// carry `NaN` values and the error message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub m: usize,
    pub seed: u64,
    #[serde(with = "extended_float")]
    pub value_gap_exact: f64,
    #[serde(with = "extended_float")]
    pub value_gap_mc: f64,
    #[serde(with = "extended_float")]
    pub bound_rhs: f64,
    pub wall_time_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Log-log slope of the seed-median exact gap against `1 / (1 - gamma)` with a
/// 90% seed-bootstrap interval. Absent when fewer than two discounts remain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub algorithm: Algorithm,
    pub m: usize,
    pub slope: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    /// Discounts that had a gap above the floor.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianGap {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub m: usize,
    pub median_gap_exact: Option<f64>,
}

/// Paired seed-bootstrap test that the median gap does not rise from
/// `m_from` to `m_to`: passes unless the 5% quantile of the resampled
/// difference `median(m_to) - median(m_from)` is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub m_from: usize,
    pub m_to: usize,
    pub median_difference: Option<f64>,
    pub difference_q05: Option<f64>,
    pub non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub schema_version: u32,
    pub kind: SweepKind,
    /// The resolved configuration that produced the rows.
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub slopes: Vec<SlopeFit>,
    pub medians: Vec<MedianGap>,
    pub monotonicity: Vec<MonotoneCheck>,
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn empty(kind: SweepKind, config: SweepConfig) -> Self {
        Self {
            schema_version: RESULT_SCHEMA_VERSION,
            kind,
            config,
            rows: Vec::new(),
            slopes: Vec::new(),
            medians: Vec::new(),
            monotonicity: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn slope(&self, algorithm: Algorithm) -> Option<f64> {
        self.slopes.iter().find(|s| s.algorithm == algorithm).and_then(|s| s.slope)
    }

    pub fn median(&self, algorithm: Algorithm, gamma: f64, m: usize) -> Option<f64> {
        self.medians
            .iter()
            .find(|c| c.algorithm == algorithm && c.gamma == gamma && c.m == m)
            .and_then(|c| c.median_gap_exact)
    }

    pub fn failed_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }
}

/// Runs the horizon-dependency sweep (defaults: six discounts, m = 25).
pub fn run_horizon_sweep(config: &SweepConfig) -> Result<SweepResult> {
    run_sweep(config, SweepKind::Horizon)
}

/// Runs the sample-complexity sweep (defaults: gamma = 0.999, m in 1, 5, 10, 25).
pub fn run_sample_sweep(config: &SweepConfig) -> Result<SweepResult> {
    run_sweep(config, SweepKind::Samples)
}

struct DiscountSetup {
    gamma: f64,
    mdp: TabularMdp<f64>,
    expert: Policy,
    expert_value: f64,
    expert_occupancy: OccupancyMeasure<f64>,
}

fn setup(config: &SweepConfig, gamma: f64) -> Result<DiscountSetup> {
    let mdp = build_environment(&config.environment, gamma)?;
    let expert = optimal_policy(&mdp, DEFAULT_RL_TOL)?;
    let expert_value = policy_value_exact(&mdp, &expert)?;
    let expert_occupancy = occupancy(&mdp, &expert)?;
    Ok(DiscountSetup { gamma, mdp, expert, expert_value, expert_occupancy })
}

/// Discounted mass beyond the sampling horizon, `gamma^H R / (1 - gamma)`.
pub fn truncation_bias(gamma: f64, r_max: f64, horizon: usize) -> f64 {
    gamma.powf(horizon as f64) * r_max / (1.0 - gamma)
}

pub fn run_sweep(config: &SweepConfig, kind: SweepKind) -> Result<SweepResult> {
    let config = config.resolved(kind);
    config.validate()?;
    let setups: Vec<DiscountSetup> = config.gammas().par_iter().map(|&g| setup(&config, g)).collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    for s in &setups {
        let bias = truncation_bias(s.gamma, s.mdp.r_max(), config.horizon);
        if bias > TRUNCATION_WARN_LEVEL {
            warnings.push(format!(
                "gamma {}: horizon {} truncates discounted mass up to {bias:.3e}; Monte Carlo gaps are biased",
                s.gamma, config.horizon
            ));
        }
    }

    let algorithms = row_algorithms(&config);
    let (n_m, n_s) = (config.ms().len(), config.seeds.len());
    let groups: Vec<(usize, usize, usize)> =
        (0..setups.len()).flat_map(|g| (0..n_m).flat_map(move |m| (0..n_s).map(move |s| (g, m, s)))).collect();
    let grouped: Vec<Vec<SweepRow>> = groups
        .par_iter()
        .map(|&(g, m, s)| run_group(&config, kind, &setups[g], config.ms()[m], config.seeds[s], &algorithms))
        .collect();

    // reassemble as algorithm-major, then gamma, m, seed
    let mut rows = Vec::with_capacity(grouped.len() * algorithms.len());
    for a in 0..algorithms.len() {
        rows.extend(grouped.iter().map(|g| g[a].clone()));
    }

    let mut result = SweepResult::empty(kind, config);
    result.rows = rows;
    result.warnings = warnings;
    summarize(&mut result, &algorithms);
    Ok(result)
}

fn row_algorithms(config: &SweepConfig) -> Vec<Algorithm> {
    let mut out = config.algorithms.clone();
    if config.expert_control {
        out.push(Algorithm::Expert);
    }
    out
}

/// Seed of the demonstration stream for seed label `seed`. It does not depend
/// on gamma or m, so samples for smaller m are prefixes of larger ones.
pub fn demo_seed(base_seed: u64, seed: u64) -> u64 {
    derive_seed(base_seed, seed)
}

fn run_group(
    config: &SweepConfig,
    kind: SweepKind,
    setup: &DiscountSetup,
    m: usize,
    seed: u64,
    algorithms: &[Algorithm],
) -> Vec<SweepRow> {
    let stream = demo_seed(config.base_seed, seed);
    let row = |algorithm| SweepRow {
        algorithm,
        gamma: setup.gamma,
        m,
        seed,
        value_gap_exact: f64::NAN,
        value_gap_mc: f64::NAN,
        bound_rhs: f64::NAN,
        wall_time_ms: 0,
        error: None,
    };
    let prepared = Demonstrations::sample(&setup.mdp, &setup.expert, m, config.horizon, stream).and_then(|demos| {
        let eval_seed = derive_seed(stream, 1);
        let mc_expert = mc_value(setup, &setup.expert, config, eval_seed)?;
        Ok((demos, eval_seed, mc_expert))
    });
    let (demos, eval_seed, mc_expert) = match prepared {
        Ok(p) => p,
        Err(e) => {
            return algorithms.iter().map(|&a| SweepRow { error: Some(e.to_string()), ..row(a) }).collect();
        }
    };
    algorithms
        .iter()
        .map(|&a| {
            let start = config.record_wall_time.then(Instant::now);
            let outcome = evaluate(config, kind, setup, &demos, a, stream, eval_seed, mc_expert);
            let wall_time_ms = start.map_or(0, |t| t.elapsed().as_millis() as u64);
            match outcome {
                Ok((exact, mc, rhs)) => {
                    SweepRow { value_gap_exact: exact, value_gap_mc: mc, bound_rhs: rhs, wall_time_ms, ..row(a) }
                }
                Err(e) => SweepRow { wall_time_ms, error: Some(e.to_string()), ..row(a) },
            }
        })
        .collect()
}

fn mc_value(setup: &DiscountSetup, pi: &Policy, config: &SweepConfig, eval_seed: u64) -> Result<f64> {
    let trajs = sample_trajectories(&setup.mdp, pi, config.horizon, config.eval_trajectories, eval_seed)?;
    Ok(monte_carlo_value(&trajs, setup.gamma)?.mean)
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    config: &SweepConfig,
    kind: SweepKind,
    setup: &DiscountSetup,
    demos: &Demonstrations,
    algorithm: Algorithm,
    stream: u64,
    eval_seed: u64,
    mc_expert: f64,
) -> Result<(f64, f64, f64)> {
    let trained = train(algorithm, &setup.mdp, &setup.expert, demos, &config.learners, config.horizon, stream)?;
    let pi = &trained.policy;
    let exact = (policy_value_exact(&setup.mdp, pi)? - setup.expert_value).abs();
    // common random numbers: the expert row's Monte Carlo gap is exactly zero
    let mc = (mc_value(setup, pi, config, eval_seed)? - mc_expert).abs();
    let rhs = bound_rhs(config, kind, setup, demos, algorithm, pi, trained.report.as_ref().map(|r| r.epsilon_achieved))?;
    Ok((exact, mc, rhs))
}

/// Theoretical column: the BC bounds for BC (with the finite-sample term in the
/// sample sweep), the JS bound for the matching learners, and for GAIL in the
/// sample sweep the generalization bound, which is `inf` when an occupancy
/// has zeros.
fn bound_rhs(
    config: &SweepConfig,
    kind: SweepKind,
    setup: &DiscountSetup,
    demos: &Demonstrations,
    algorithm: Algorithm,
    pi: &Policy,
    epsilon: Option<f64>,
) -> Result<f64> {
    let (mdp, gamma, r_max) = (&setup.mdp, setup.gamma, setup.mdp.r_max());
    let js_rhs = || -> Result<f64> {
        let j = js(occupancy(mdp, pi)?.state_action_dist(), setup.expert_occupancy.state_action_dist())?;
        Ok(formulas::theorem3_rhs(gamma, r_max, j))
    };
    Ok(match (algorithm, kind) {
        (Algorithm::Expert, _) => 0.0,
        (Algorithm::Bc, SweepKind::Horizon) => {
            formulas::theorem1_rhs(gamma, r_max, expected_policy_tv(mdp, &setup.expert, pi)?)
        }
        (Algorithm::Bc, SweepKind::Samples) => {
            let eps_hat = bc_01_loss(&pi.determinized(), &demos.pairs)?;
            let log_count = formulas::log_policy_count(mdp.n_states(), mdp.n_actions());
            formulas::theorem2_rhs(gamma, r_max, eps_hat, log_count, demos.pairs.len(), config.delta)
        }
        (Algorithm::Gail, SweepKind::Samples) => {
            let class = complete_class(&config.learners)?;
            let lambda = match lambda_complexity(&occupancy(mdp, pi)?, &setup.expert_occupancy, &class) {
                Ok(l) => l,
                Err(CoreError::NonPositiveDensity(_)) => return Ok(f64::INFINITY),
                Err(e) => return Err(e.into()),
            };
            let rademacher = rademacher_complete_exact(class.delta(), &demos.pairs)?;
            let bracket = formulas::gail_bracket(
                0.0,
                epsilon.unwrap_or(0.0),
                rademacher,
                class.delta(),
                demos.pairs.len(),
                config.delta,
            );
            formulas::theorem5_rhs(gamma, r_max, lambda, bracket)
        }
        _ => js_rhs()?,
    })
}

fn summarize(result: &mut SweepResult, algorithms: &[Algorithm]) {
    let config = &result.config;
    let (gammas, ms, n_seeds) = (config.gammas().to_vec(), config.ms().to_vec(), config.seeds.len());
    // gaps[a][m][g][s]; rows are algorithm-major then gamma, m, seed
    let per_alg = gammas.len() * ms.len() * n_seeds;
    let gap = |a: usize, g: usize, m: usize, s: usize| {
        result.rows[a * per_alg + (g * ms.len() + m) * n_seeds + s].value_gap_exact
    };
    let grid = |a: usize, m: usize| -> Vec<Vec<f64>> {
        (0..gammas.len()).map(|g| (0..n_seeds).map(|s| gap(a, g, m, s)).collect()).collect()
    };

    let mut medians = Vec::new();
    let mut slopes = Vec::new();
    let mut monotonicity = Vec::new();
    for (a, &algorithm) in algorithms.iter().enumerate() {
        let boot_seed = derive_seed(config.base_seed ^ 0xB007_5712, a as u64);
        for (mi, &m) in ms.iter().enumerate() {
            let rows = grid(a, mi);
            for (gi, &gamma) in gammas.iter().enumerate() {
                medians.push(MedianGap { algorithm, gamma, m, median_gap_exact: median(&rows[gi]) });
            }
            if gammas.len() < 2 {
                continue;
            }
            let points = rows.iter().filter(|r| r.iter().any(|&x| x.is_finite() && x > GAP_FLOOR)).count();
            let slope = log_log_slope(&gammas, &rows);
            let boot = seed_bootstrap(n_seeds, BOOTSTRAP_RESAMPLES, derive_seed(boot_seed, mi as u64), |idx| {
                log_log_slope(&gammas, &resample_rows(&rows, idx))
            });
            let (ci_low, ci_high) =
                if slope.is_some() { (quantile(&boot, 0.05), quantile(&boot, 0.95)) } else { (None, None) };
            slopes.push(SlopeFit { algorithm, m, slope, ci_low, ci_high, points });
        }
        for (gi, &gamma) in gammas.iter().enumerate() {
            for mi in 1..ms.len() {
                let pair: Vec<Vec<f64>> = vec![grid(a, mi - 1)[gi].clone(), grid(a, mi)[gi].clone()];
                let diff = |rows: &[Vec<f64>]| Some(median(&rows[1])? - median(&rows[0])?);
                let observed = diff(&pair);
                let seed = derive_seed(boot_seed, (1000 + gi * ms.len() + mi) as u64);
                let boot = seed_bootstrap(n_seeds, BOOTSTRAP_RESAMPLES, seed, |idx| diff(&resample_rows(&pair, idx)));
                let q05 = quantile(&boot, 0.05);
                monotonicity.push(MonotoneCheck {
                    algorithm,
                    gamma,
                    m_from: ms[mi - 1],
                    m_to: ms[mi],
                    median_difference: observed,
                    difference_q05: q05,
                    non_increasing: q05.is_some_and(|q| q <= 0.0),
                });
            }
        }
    }
    result.medians = medians;
    result.slopes = slopes;
    result.monotonicity = monotonicity;
}
