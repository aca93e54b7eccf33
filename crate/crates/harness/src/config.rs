//! JSON configuration documents for every subcommand.
//!
//! Each document carries a `schema_version`; unknown fields are rejected so
//! that typos surface as configuration errors instead of silent defaults.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use ilgap_core::mdp::{make_environment, CliffGridParams, EnvKind, EnvSpec, FlatMdp, TabularMdp};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Learners a sweep can train, plus the expert itself as a control row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Bc,
    Dagger,
    Gail,
    Fem,
    Mwal,
    Expert,
}

impl Algorithm {
    pub const LEARNERS: [Algorithm; 5] = [Algorithm::Bc, Algorithm::Dagger, Algorithm::Gail, Algorithm::Fem, Algorithm::Mwal];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Bc => "bc",
            Algorithm::Dagger => "dagger",
            Algorithm::Gail => "gail",
            Algorithm::Fem => "fem",
            Algorithm::Mwal => "mwal",
            Algorithm::Expert => "expert",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Horizon,
    Samples,
}

impl SweepKind {
    pub fn default_gamma_grid(self) -> Vec<f64> {
        match self {
            SweepKind::Horizon => vec![0.9, 0.95, 0.98, 0.99, 0.995, 0.999],
            SweepKind::Samples => vec![0.999],
        }
    }

    pub fn default_demo_counts(self) -> Vec<usize> {
        match self {
            SweepKind::Horizon => vec![25],
            SweepKind::Samples => vec![1, 5, 10, 25],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GailSettings {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_gap_tolerance")]
    pub gap_tolerance: f64,
    /// Value bound of the complete indicator discriminator class.
    #[serde(default = "unit")]
    pub delta_bound: f64,
}

impl Default for GailSettings {
    fn default() -> Self {
        Self { iterations: default_iterations(), gap_tolerance: default_gap_tolerance(), delta_bound: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApprenticeshipSettings {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

impl Default for ApprenticeshipSettings {
    fn default() -> Self {
        Self { iterations: default_iterations() }
    }
}

/// DAgger runs one iteration per demonstration trajectory so that its label
/// budget matches the other learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaggerSettings {
    #[serde(default = "one")]
    pub rollouts_per_iteration: usize,
}

impl Default for DaggerSettings {
    fn default() -> Self {
        Self { rollouts_per_iteration: 1 }
    }
}

/// Learner hyperparameters shared by sweeps and `train`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSettings {
    #[serde(default)]
    pub gail: GailSettings,
    #[serde(default)]
    pub apprenticeship: ApprenticeshipSettings,
    #[serde(default)]
    pub dagger: DaggerSettings,
}

impl LearnerSettings {
    fn validate(&self) -> Result<()> {
        let g = &self.gail;
        if g.iterations == 0 || self.apprenticeship.iterations == 0 || self.dagger.rollouts_per_iteration == 0 {
            return Err(HarnessError::config("learner iteration and rollout counts must be at least 1"));
        }
        if !(g.gap_tolerance >= 0.0) || !(g.delta_bound > 0.0) || !g.delta_bound.is_finite() {
            return Err(HarnessError::config("gail.gap_tolerance must be >= 0 and gail.delta_bound positive"));
        }
        Ok(())
    }
}

/// Horizon and sample-complexity sweeps. Absent grids take the defaults of
/// the sweep being run; the environment's own `gamma` is overridden per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    #[serde(default = "default_sweep_environment")]
    pub environment: EnvSpec,
    #[serde(default)]
    pub gamma_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub demo_counts: Option<Vec<usize>>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// Adds the expert-as-learner row, whose exact gap must be zero.
    #[serde(default = "yes")]
    pub expert_control: bool,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Root of every per-cell random stream.
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_eval_trajectories")]
    pub eval_trajectories: usize,
    /// Confidence parameter of the generalization bound columns.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub learners: LearnerSettings,
    /// Measure wall time per cell; off by default because it breaks byte-identical output.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub output_path: Option<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            environment: default_sweep_environment(),
            gamma_grid: None,
            demo_counts: None,
            algorithms: default_algorithms(),
            expert_control: true,
            seeds: default_seeds(),
            base_seed: 0,
            horizon: default_horizon(),
            eval_trajectories: default_eval_trajectories(),
            delta: default_delta(),
            learners: LearnerSettings::default(),
            record_wall_time: false,
            output_path: None,
        }
    }
}

impl SweepConfig {
    /// Copy with absent grids filled in from `kind`'s defaults.
    pub fn resolved(&self, kind: SweepKind) -> Self {
        let mut out = self.clone();
        out.gamma_grid.get_or_insert_with(|| kind.default_gamma_grid());
        out.demo_counts.get_or_insert_with(|| kind.default_demo_counts());
        out
    }

    pub fn gammas(&self) -> &[f64] {
        self.gamma_grid.as_deref().unwrap_or(&[])
    }

    pub fn ms(&self) -> &[usize] {
        self.demo_counts.as_deref().unwrap_or(&[])
    }

    /// Checks a resolved config.
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        let gammas = self.gamma_grid.as_deref().ok_or_else(|| HarnessError::config("gamma_grid is unresolved"))?;
        let ms = self.demo_counts.as_deref().ok_or_else(|| HarnessError::config("demo_counts is unresolved"))?;
        if gammas.is_empty() || ms.is_empty() || self.seeds.is_empty() {
            return Err(HarnessError::config("gamma_grid, demo_counts and seeds must be nonempty"));
        }
        for &g in gammas {
            check_gamma(g)?;
        }
        if ms.contains(&0) {
            return Err(HarnessError::config("demo_counts entries must be at least 1"));
        }
        check_distinct("gamma_grid", gammas.iter().map(|g| g.to_bits()))?;
        check_distinct("demo_counts", ms.iter().copied())?;
        check_distinct("seeds", self.seeds.iter().copied())?;
        check_distinct("algorithms", self.algorithms.iter().copied())?;
        if self.algorithms.contains(&Algorithm::Expert) {
            return Err(HarnessError::config("the expert row is controlled by expert_control, not algorithms"));
        }
        if self.horizon == 0 || self.eval_trajectories == 0 {
            return Err(HarnessError::config("horizon and eval_trajectories must be at least 1"));
        }
        check_confidence(self.delta)?;
        self.learners.validate()?;
        for &g in gammas {
            build_environment(&self.environment, g)?;
        }
        Ok(())
    }
}

/// Probabilistic part of the bound suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilisticSettings {
    #[serde(default = "yes")]
    pub enabled: bool,
    /// Demonstration pairs per resampled set.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_lemma4_trials")]
    pub lemma4_trials: usize,
    #[serde(default = "default_gail_trials")]
    pub gail_trials: usize,
    #[serde(default = "default_suite_gail_iterations")]
    pub gail_iterations: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Environment for the BC trials; its optimal deterministic policy is the expert.
    #[serde(default = "default_lemma4_environment")]
    pub lemma4_environment: EnvSpec,
    /// Environment for the GAIL trials; the expert is a softmax of the optimal
    /// Q-values so that occupancies are strictly positive.
    #[serde(default = "default_gail_environment")]
    pub gail_environment: EnvSpec,
    #[serde(default = "default_temperature")]
    pub expert_temperature: f64,
}

impl Default for ProbabilisticSettings {
    fn default() -> Self {
        Self {
            enabled: true,
            m: default_m(),
            delta: default_delta(),
            lemma4_trials: default_lemma4_trials(),
            gail_trials: default_gail_trials(),
            gail_iterations: default_suite_gail_iterations(),
            horizon: default_horizon(),
            lemma4_environment: default_lemma4_environment(),
            gail_environment: default_gail_environment(),
            expert_temperature: default_temperature(),
        }
    }
}

/// Batch certification over generated and user-supplied MDPs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSuiteConfig {
    pub schema_version: u32,
    /// Generated instances; random and cliff environments alternate.
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_suite_gammas")]
    pub gammas: Vec<f64>,
    #[serde(default = "default_max_states")]
    pub max_states: usize,
    #[serde(default = "default_max_actions")]
    pub max_actions: usize,
    /// Learners that supply policy pairs besides random pairs. Only `bc` and
    /// `gail` are used; an empty list leaves random pairs only.
    #[serde(default = "default_suite_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub seed: u64,
    /// Extra MDPs in the flat tensor format, validated before any check runs.
    #[serde(default)]
    pub explicit_mdps: Vec<FlatMdp<f64>>,
    #[serde(default)]
    pub probabilistic: ProbabilisticSettings,
    #[serde(default)]
    pub output_path: Option<String>,
}

impl Default for BoundSuiteConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            instances: default_instances(),
            gammas: default_suite_gammas(),
            max_states: default_max_states(),
            max_actions: default_max_actions(),
            algorithms: default_suite_algorithms(),
            seed: 0,
            explicit_mdps: Vec::new(),
            probabilistic: ProbabilisticSettings::default(),
            output_path: None,
        }
    }
}

impl BoundSuiteConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        if self.instances > 0 && self.gammas.is_empty() {
            return Err(HarnessError::config("gammas must be nonempty when instances > 0"));
        }
        for &g in &self.gammas {
            check_gamma(g)?;
        }
        if self.max_states < 2 || self.max_actions < 1 {
            return Err(HarnessError::config("max_states must be at least 2 and max_actions at least 1"));
        }
        for a in &self.algorithms {
            if !matches!(a, Algorithm::Bc | Algorithm::Gail) {
                return Err(HarnessError::config(format!("the bound suite pairs only bc and gail, not {a}")));
            }
        }
        self.explicit_instances()?;
        let p = &self.probabilistic;
        if p.enabled {
            if p.m == 0 || p.lemma4_trials == 0 || p.gail_trials == 0 || p.gail_iterations == 0 || p.horizon == 0 {
                return Err(HarnessError::config("probabilistic counts must be at least 1"));
            }
            check_confidence(p.delta)?;
            if !(p.expert_temperature > 0.0) || !p.expert_temperature.is_finite() {
                return Err(HarnessError::config("expert_temperature must be positive"));
            }
            build_environment(&p.lemma4_environment, p.lemma4_environment.gamma)?;
            build_environment(&p.gail_environment, p.gail_environment.gamma)?;
        }
        Ok(())
    }

    /// The explicit MDPs after validation; any invalid one is a config error.
    pub fn explicit_instances(&self) -> Result<Vec<TabularMdp<f64>>> {
        self.explicit_mdps
            .iter()
            .enumerate()
            .map(|(i, flat)| {
                TabularMdp::try_from(flat.clone()).map_err(|e| HarnessError::config(format!("explicit_mdps[{i}]: {e}")))
            })
            .collect()
    }
}

/// Single training run on one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub schema_version: u32,
    #[serde(default = "default_train_environment")]
    pub environment: EnvSpec,
    #[serde(default = "default_train_algorithm")]
    pub algorithm: Algorithm,
    /// Demonstration trajectories.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub learners: LearnerSettings,
    #[serde(default)]
    pub output_path: Option<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            environment: default_train_environment(),
            algorithm: default_train_algorithm(),
            m: default_m(),
            horizon: default_horizon(),
            seed: 0,
            learners: LearnerSettings::default(),
            output_path: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        if self.m == 0 || self.horizon == 0 {
            return Err(HarnessError::config("m and horizon must be at least 1"));
        }
        self.learners.validate()?;
        build_environment(&self.environment, self.environment.gamma)?;
        Ok(())
    }
}

/// Environment export in the flat tensor format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvDumpConfig {
    pub schema_version: u32,
    #[serde(default = "default_train_environment")]
    pub environment: EnvSpec,
    #[serde(default)]
    pub output_path: Option<String>,
}

impl Default for EnvDumpConfig {
    fn default() -> Self {
        Self { schema_version: CONFIG_SCHEMA_VERSION, environment: default_train_environment(), output_path: None }
    }
}

impl EnvDumpConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        build_environment(&self.environment, self.environment.gamma)?;
        Ok(())
    }
}

/// Parses a config document, checking the schema version before the fields so
/// that a version mismatch is reported as such.
pub fn parse_config<C: DeserializeOwned>(text: &str) -> Result<C> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| HarnessError::config(format!("invalid JSON: {e}")))?;
    match value.get("schema_version") {
        None => return Err(HarnessError::config("missing schema_version")),
        Some(v) => {
            let version = v.as_u64().ok_or_else(|| HarnessError::config("schema_version must be an integer"))?;
            check_schema(version as u32)?;
        }
    }
    serde_json::from_value(value).map_err(|e| HarnessError::config(e.to_string()))
}

/// Reads and parses `path`, or returns the default document when absent.
pub fn load_config<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| HarnessError::ConfigRead { path: p.into(), source })?;
            parse_config(&text)
        }
    }
}

/// Builds `spec` at discount `gamma`, mapping failures to config errors.
pub fn build_environment(spec: &EnvSpec, gamma: f64) -> Result<TabularMdp<f64>> {
    check_gamma(gamma)?;
    let spec = EnvSpec { gamma, ..spec.clone() };
    make_environment(&spec).map_err(|e| HarnessError::config(format!("environment: {e}")))
}

fn check_schema(version: u32) -> Result<()> {
    if version != CONFIG_SCHEMA_VERSION {
        return Err(HarnessError::config(format!(
            "unsupported schema_version {version}, expected {CONFIG_SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

fn check_gamma(g: f64) -> Result<()> {
    if !(g > 0.0 && g < 1.0) {
        return Err(HarnessError::config(format!("discount factors must lie in (0, 1), got {g}")));
    }
    Ok(())
}

fn check_confidence(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(HarnessError::config(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_distinct<K: Ord>(what: &str, items: impl Iterator<Item = K>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for item in items {
        if !seen.insert(item) {
            return Err(HarnessError::config(format!("{what} contains duplicates")));
        }
    }
    Ok(())
}

/// 8x7 corridor with 5% slip: wide enough that BC's unvisited states matter.
pub fn default_sweep_environment() -> EnvSpec {
    EnvSpec::new(EnvKind::CliffGrid(CliffGridParams::new(8, 7, 0.05)), 0.999, 0)
}

fn default_train_environment() -> EnvSpec {
    EnvSpec::new(EnvKind::CliffGrid(CliffGridParams::new(8, 7, 0.05)), 0.9, 0)
}

fn default_lemma4_environment() -> EnvSpec {
    EnvSpec::new(EnvKind::CliffGrid(CliffGridParams::new(5, 5, 0.1)), 0.9, 0)
}

fn default_gail_environment() -> EnvSpec {
    EnvSpec::new(EnvKind::Random { n_states: 6, n_actions: 3, branching: None }, 0.9, 26)
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::LEARNERS.to_vec()
}

fn default_suite_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Bc, Algorithm::Gail]
}

fn default_train_algorithm() -> Algorithm {
    Algorithm::Gail
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_suite_gammas() -> Vec<f64> {
    vec![0.5, 0.9, 0.99]
}

fn default_iterations() -> usize {
    300
}

fn default_suite_gail_iterations() -> usize {
    200
}

fn default_gap_tolerance() -> f64 {
    1e-3
}

fn default_horizon() -> usize {
    1000
}

fn default_eval_trajectories() -> usize {
    20
}

fn default_delta() -> f64 {
    0.1
}

fn default_m() -> usize {
    25
}

fn default_instances() -> usize {
    240
}

fn default_max_states() -> usize {
    20
}

fn default_max_actions() -> usize {
    5
}

fn default_lemma4_trials() -> usize {
    500
}

fn default_gail_trials() -> usize {
    100
}

fn default_temperature() -> f64 {
    0.3
}

fn unit() -> f64 {
    1.0
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_takes_defaults() {
        let c: SweepConfig = parse_config(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(c, SweepConfig::default());
        let r = c.resolved(SweepKind::Samples);
        assert_eq!(r.gammas(), &[0.999]);
        assert_eq!(r.ms(), &[1, 5, 10, 25]);
        r.validate().unwrap();
    }

    #[test]
    fn schema_and_field_errors_are_config_errors() {
        for text in [
            r#"{}"#,
            r#"{"schema_version": 2}"#,
            r#"{"schema_version": 1, "gama_grid": [0.9]}"#,
            r#"not json"#,
        ] {
            let err = parse_config::<SweepConfig>(text).unwrap_err();
            assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG, "{text}");
        }
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let base = SweepConfig::default().resolved(SweepKind::Horizon);
        let mut c = base.clone();
        c.gamma_grid = Some(vec![1.0]);
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.demo_counts = Some(vec![]);
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.seeds = vec![1, 1];
        assert!(c.validate().is_err());
        let mut c = base;
        c.algorithms.push(Algorithm::Expert);
        assert!(c.validate().is_err());
    }

    #[test]
    fn suite_defaults_validate() {
        BoundSuiteConfig::default().validate().unwrap();
        TrainConfig::default().validate().unwrap();
        EnvDumpConfig::default().validate().unwrap();
    }
}
