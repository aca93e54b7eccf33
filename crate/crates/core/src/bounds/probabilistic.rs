use serde::{Deserialize, Serialize};

use crate::divergences::{
    empirical_occupancy, empirical_rademacher, expected_policy_tv, lambda_complexity, neural_net_distance,
    rademacher_complete_exact, tv, DemoSet, DiscriminatorClass,
};
use crate::error::{Error, Result};
use crate::learners::{bc_01_loss, bc_fit, gail_train, GailConfig, TrainingReport};
use crate::mdp::{derive_seed, occupancy, policy_value_exact, OccupancyMeasure, TabularMdp, TabularPolicy};
use crate::scalar::Scalar;

use super::formulas;
use super::{BoundContext, BoundId, BoundReport};

/// Resampling protocol shared by the generalization checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    /// Demonstration pairs per trial.
    pub m: usize,
    pub delta: f64,
    pub trials: usize,
    /// Truncation of the discounted resampling rollouts.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Sign draws for the Monte Carlo Rademacher estimate (linear class only).
    #[serde(default = "default_sigma_draws")]
    pub sigma_draws: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_horizon() -> usize {
    1000
}

fn default_sigma_draws() -> usize {
    200
}

impl TrialParams {
    pub fn new(m: usize, delta: f64, trials: usize, seed: u64) -> Self {
        Self { m, delta, trials, horizon: default_horizon(), sigma_draws: default_sigma_draws(), seed }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.trials == 0 || self.horizon == 0 || self.sigma_draws == 0 {
            return Err(Error::InvalidParameter("m, trials, horizon and sigma_draws must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.seed, trial as u64)
    }

    fn context(&self, gamma: f64, trial: usize) -> BoundContext {
        BoundContext {
            gamma: Some(gamma),
            m: Some(self.m),
            delta: Some(self.delta),
            mdp_seed: None,
            policies: None,
            note: Some(format!("trial {trial}, demo seed {}", self.trial_seed(trial))),
        }
    }
}

/// Reports of one probabilistic check and the fraction that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ProbabilisticOutcome<T> {
    pub bound_id: BoundId,
    pub violation_rate: f64,
    pub reports: Vec<BoundReport<T>>,
}

impl<T: Scalar> ProbabilisticOutcome<T> {
    fn from_reports(bound_id: BoundId, reports: Vec<BoundReport<T>>) -> Self {
        let violations = reports.iter().filter(|r| !r.holds).count();
        let violation_rate = if reports.is_empty() { 0.0 } else { violations as f64 / reports.len() as f64 };
        Self { bound_id, violation_rate, reports }
    }
}

/// BC generalization over deterministic policies: in each trial `m` pairs are
/// drawn from the expert's discounted occupancy, BC is fit and determinized,
/// and `E_dE[TV(pi_bc, pi_E)]` is compared with the empirical 0-1 loss plus the
/// union-bound deviation term.
pub fn check_lemma4_generalization<T: Scalar>(
    mdp: &TabularMdp<T>,
    pi_e: &TabularPolicy<T>,
    params: &TrialParams,
) -> Result<ProbabilisticOutcome<T>> {
    params.validate()?;
    pi_e.check_shape(mdp.n_states(), mdp.n_actions())?;
    if !pi_e.is_deterministic() {
        return Err(Error::InvalidPolicy("the BC generalization check needs a deterministic expert".into()));
    }
    let (n, k) = (mdp.n_states(), mdp.n_actions());
    let log_count = formulas::log_policy_count::<T>(n, k);
    let delta = T::lit(params.delta);
    let mut reports = Vec::with_capacity(params.trials);
    for trial in 0..params.trials {
        let demos = DemoSet::discounted_resample(mdp, pi_e, params.m, params.horizon, params.trial_seed(trial))?;
        let pi_bc = bc_fit::<T>(&demos, n, k)?.determinized();
        let eps_hat = bc_01_loss(&pi_bc, &demos)?;
        let lhs = expected_policy_tv(mdp, pi_e, &pi_bc)?;
        let rhs = formulas::lemma4_rhs(eps_hat, log_count, params.m, delta);
        reports.push(BoundReport::new(
            BoundId::Lemma4Generalization,
            lhs,
            rhs,
            params.context(mdp.gamma().as_f64(), trial),
        ));
    }
    Ok(ProbabilisticOutcome::from_reports(BoundId::Lemma4Generalization, reports))
}

/// One GAIL retraining on a fresh demonstration sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GailTrial<T> {
    pub trial: usize,
    pub demo_seed: u64,
    pub report: TrainingReport<T>,
    /// Exact occupancy of the extracted policy.
    pub occupancy: OccupancyMeasure<T>,
    pub rademacher: T,
}

/// Draws `params.trials` demonstration samples from the expert's discounted
/// occupancy and trains GAIL on each.
pub fn run_gail_trials<T: Scalar>(
    mdp: &TabularMdp<T>,
    pi_e: &TabularPolicy<T>,
    config: &GailConfig<T>,
    params: &TrialParams,
) -> Result<Vec<GailTrial<T>>> {
    params.validate()?;
    pi_e.check_shape(mdp.n_states(), mdp.n_actions())?;
    let (n, k) = (mdp.n_states(), mdp.n_actions());
    (0..params.trials)
        .map(|trial| {
            let demo_seed = params.trial_seed(trial);
            let demos = DemoSet::discounted_resample(mdp, pi_e, params.m, params.horizon, demo_seed)?;
            let rho_hat = empirical_occupancy::<T>(&demos, n, k)?;
            let report = gail_train(mdp, &rho_hat, config, demo_seed)?;
            let occ = occupancy(mdp, &report.final_policy)?;
            let rademacher = match &config.dclass {
                DiscriminatorClass::CompleteIndicator { delta } => rademacher_complete_exact(*delta, &demos)?,
                DiscriminatorClass::LinearFeature { .. } => {
                    empirical_rademacher(&config.dclass, &demos, params.sigma_draws, derive_seed(demo_seed, 1))?.estimate
                }
            };
            Ok(GailTrial { trial, demo_seed, report, occupancy: occ, rademacher })
        })
        .collect()
}

/// Outcomes of the three GAIL generalization checks on shared trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GailGeneralization<T> {
    pub lemma5: ProbabilisticOutcome<T>,
    pub lemma7: ProbabilisticOutcome<T>,
    pub theorem5: ProbabilisticOutcome<T>,
}

struct TrialTerms<T> {
    distance: T,
    occupancy_tv: T,
    value_gap: T,
    lambda: Option<T>,
    bracket: T,
    lemma5_rhs: T,
}

fn trial_terms<T: Scalar>(
    mdp: &TabularMdp<T>,
    rho_e: &OccupancyMeasure<T>,
    v_e: T,
    dclass: &DiscriminatorClass<T>,
    params: &TrialParams,
    trial: &GailTrial<T>,
) -> Result<TrialTerms<T>> {
    let delta = T::lit(params.delta);
    let eps = trial.report.epsilon_achieved.max(T::zero());
    let (p, q) = (trial.occupancy.state_action_dist(), rho_e.state_action_dist());
    // the expert itself is a tabular policy, so inf_pi d(rho_pi, rho_E) = 0
    let inf_term = T::zero();
    let lambda = match lambda_complexity(&trial.occupancy, rho_e, dclass) {
        Ok(l) => Some(l),
        Err(Error::NonPositiveDensity(_)) | Err(Error::UnsupportedClass(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(TrialTerms {
        distance: neural_net_distance(p, q, dclass)?,
        occupancy_tv: tv(p, q)?,
        value_gap: (policy_value_exact(mdp, &trial.report.final_policy)? - v_e).abs(),
        lambda,
        bracket: formulas::gail_bracket(inf_term, eps, trial.rademacher, dclass.delta(), params.m, delta),
        lemma5_rhs: formulas::lemma5_rhs(inf_term, eps, trial.rademacher, dclass.delta(), params.m, delta),
    })
}

/// Evaluates the neural-distance, TV and value generalization bounds on
/// already-trained trials. Without a finite `Lambda` (linear class or an
/// occupancy with zeros) the TV and value bounds are reported as `+inf`.
pub fn gail_generalization_reports<T: Scalar>(
    mdp: &TabularMdp<T>,
    pi_e: &TabularPolicy<T>,
    dclass: &DiscriminatorClass<T>,
    params: &TrialParams,
    trials: &[GailTrial<T>],
) -> Result<GailGeneralization<T>> {
    let rho_e = occupancy(mdp, pi_e)?;
    let v_e = policy_value_exact(mdp, pi_e)?;
    let gamma = mdp.gamma();
    let (mut l5, mut l7, mut t5) = (Vec::new(), Vec::new(), Vec::new());
    for trial in trials {
        let terms = trial_terms(mdp, &rho_e, v_e, dclass, params, trial)?;
        let mut ctx = params.context(gamma.as_f64(), trial.trial);
        l5.push(BoundReport::new(BoundId::Lemma5NeuralGen, terms.distance, terms.lemma5_rhs, ctx.clone()));
        let (tv_rhs, value_rhs) = match terms.lambda {
            Some(lambda) => {
                ctx.note = Some(format!("{}; lambda = {lambda}", ctx.note.unwrap_or_default()));
                (
                    formulas::lemma7_rhs(lambda, terms.bracket),
                    formulas::theorem5_rhs(gamma, mdp.r_max(), lambda, terms.bracket),
                )
            }
            None => {
                ctx.note = Some(format!("{}; lambda unbounded", ctx.note.unwrap_or_default()));
                (T::infinity(), T::infinity())
            }
        };
        l7.push(BoundReport::new(BoundId::Lemma7Tv, terms.occupancy_tv, tv_rhs, ctx.clone()));
        t5.push(BoundReport::new(BoundId::Theorem5Value, terms.value_gap, value_rhs, ctx));
    }
    Ok(GailGeneralization {
        lemma5: ProbabilisticOutcome::from_reports(BoundId::Lemma5NeuralGen, l5),
        lemma7: ProbabilisticOutcome::from_reports(BoundId::Lemma7Tv, l7),
        theorem5: ProbabilisticOutcome::from_reports(BoundId::Theorem5Value, t5),
    })
}

/// Retrains GAIL per trial and evaluates all three GAIL generalization bounds.
pub fn check_gail_generalization<T: Scalar>(
    mdp: &TabularMdp<T>,
    pi_e: &TabularPolicy<T>,
    config: &GailConfig<T>,
    params: &TrialParams,
) -> Result<GailGeneralization<T>> {
    let trials = run_gail_trials(mdp, pi_e, config, params)?;
    gail_generalization_reports(mdp, pi_e, &config.dclass, params, &trials)
}

/// `d_D(rho_ga, rho_E) <= eps + 4 R_hat + 2 Delta sqrt(2 ln(1/delta) / m)` per trial.
pub fn check_lemma5_neural_gen<T: Scalar>(
    mdp: &TabularMdp<T>,
    pi_e: &TabularPolicy<T>,
    config: &GailConfig<T>,
    params: &TrialParams,
) -> Result<ProbabilisticOutcome<T>> {
    Ok(check_gail_generalization(mdp, pi_e, config, params)?.lemma5)
}

/// `TV(rho_ga, rho_E) <= sqrt(2 Lambda) * bracket` per trial.
pub fn check_lemma7<T: Scalar>(
    mdp: &TabularMdp<T>,
    pi_e: &TabularPolicy<T>,
    config: &GailConfig<T>,
    params: &TrialParams,
) -> Result<ProbabilisticOutcome<T>> {
    Ok(check_gail_generalization(mdp, pi_e, config, params)?.lemma7)
}

/// `|V^ga - V^E| <= 2 R sqrt(2 Lambda) / (1 - gamma) * bracket` per trial.
pub fn check_theorem5<T: Scalar>(
    mdp: &TabularMdp<T>,
    pi_e: &TabularPolicy<T>,
    config: &GailConfig<T>,
    params: &TrialParams,
) -> Result<ProbabilisticOutcome<T>> {
    Ok(check_gail_generalization(mdp, pi_e, config, params)?.theorem5)
}
