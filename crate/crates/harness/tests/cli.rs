//! End-to-end runs of the `ilgap` binary and its exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

use ilgap::config::{BoundSuiteConfig, ProbabilisticSettings, CONFIG_SCHEMA_VERSION};
use ilgap::emit::SWEEP_CSV_HEADER;
use ilgap::error::{HarnessError, EXIT_CONFIG, EXIT_VIOLATION};
use ilgap::train::TrainOutcome;
use ilgap::SuiteResult;
use ilgap_core::bounds::{check_theorem1, BoundContext, BoundId};
use ilgap_core::mdp::{make_environment, FlatMdp, TabularMdp};
use ilgap_core::BoundReport;

fn ilgap(args: &[&str], config: Option<&Path>, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ilgap"));
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_SWEEP: &str = r#"{
  "schema_version": 1,
  "environment": {"kind": "cliff_grid", "params": {"width": 4, "height": 5, "slip": 0.1}},
  "gamma_grid": [0.8, 0.9, 0.95],
  "demo_counts": [2],
  "seeds": [0, 1, 2],
  "horizon": 80,
  "eval_trajectories": 5,
  "learners": {"gail": {"iterations": 50}, "apprenticeship": {"iterations": 40}}
}"#;

#[test]
fn sweep_writes_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SMALL_SWEEP);
    let out = ilgap(&["sweep-horizon", "--seed", "3"], Some(&cfg), Some(&dir.path().join("out")));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/sweep_horizon.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_CSV_HEADER.join(","));
    assert_eq!(lines.count(), 6 * 3 * 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("slope bc"));
}

#[test]
fn sample_sweep_runs_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_SWEEP.replace(r#""gamma_grid": [0.8, 0.9, 0.95],"#, "").replace(r#""demo_counts": [2],"#, r#""demo_counts": [1, 3],"#);
    let cfg = write(dir.path(), "samples.json", &text);
    let out = ilgap(&["sweep-samples"], Some(&cfg), Some(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep_samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6 * 2 * 3);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("0.999")));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("version.json", r#"{"schema_version": 99}"#),
        ("missing.json", r#"{"gamma_grid": [0.9]}"#),
        ("gamma.json", r#"{"schema_version": 1, "gamma_grid": [1.5]}"#),
        ("unknown.json", r#"{"schema_version": 1, "seedz": [1]}"#),
        ("syntax.json", "{"),
    ] {
        let cfg = write(dir.path(), name, text);
        let out = ilgap(&["sweep-horizon"], Some(&cfg), Some(dir.path()));
        assert_eq!(out.status.code(), Some(EXIT_CONFIG), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = ilgap(&["train"], Some(&dir.path().join("absent.json")), None);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    let out = ilgap(&["no-such-command"], None, None);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn perturbed_transition_row_is_rejected_before_checks() {
    let spec = ilgap_core::mdp::EnvSpec::new(
        ilgap_core::mdp::EnvKind::Random { n_states: 3, n_actions: 2, branching: None },
        0.9,
        5,
    );
    let mdp: TabularMdp<f64> = make_environment(&spec).unwrap();
    let mut flat: FlatMdp<f64> = mdp.to_flat();
    let row = &mut flat.transition[0..3];
    let total: f64 = row.iter().sum();
    for p in row.iter_mut() {
        *p *= 1.01 / total;
    }
    let config = BoundSuiteConfig {
        instances: 4,
        explicit_mdps: vec![flat],
        probabilistic: ProbabilisticSettings { enabled: false, ..ProbabilisticSettings::default() },
        ..BoundSuiteConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "suite.json", &serde_json::to_string(&config).unwrap());
    let out = ilgap(&["check-bounds"], Some(&cfg), Some(&dir.path().join("out")));
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("explicit_mdps[0]"));
    assert!(!dir.path().join("out/bound_summary.csv").exists());
}

#[test]
fn check_bounds_succeeds_on_valid_explicit_mdp() {
    let spec = ilgap_core::mdp::EnvSpec::new(
        ilgap_core::mdp::EnvKind::Chain { n_states: 4, n_actions: 2, start_reward: 1.0, end_reward: 0.0 },
        0.9,
        0,
    );
    let mdp: TabularMdp<f64> = make_environment(&spec).unwrap();
    let config = BoundSuiteConfig {
        instances: 6,
        explicit_mdps: vec![mdp.to_flat()],
        probabilistic: ProbabilisticSettings { enabled: false, ..ProbabilisticSettings::default() },
        ..BoundSuiteConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "suite.json", &serde_json::to_string(&config).unwrap());
    let out = ilgap(&["check-bounds", "--seed", "11"], Some(&cfg), Some(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("bound_summary.csv")).unwrap();
    assert!(summary.starts_with("bound_id,instances,min_slack,violation_rate\n"));
    // 6 generated instances plus the explicit MDP under each of 3 pair kinds
    assert!(summary.contains("\nlemma1,9,"));
    let reports = std::fs::read_to_string(dir.path().join("bound_reports.jsonl")).unwrap();
    for line in reports.lines() {
        let r: BoundReport = serde_json::from_str(line).unwrap();
        assert!(r.holds || !r.bound_id.is_deterministic());
    }
}

#[test]
fn deterministic_violation_maps_to_exit_three() {
    let bad = BoundReport::new(BoundId::Lemma3, 2.0, 1.0, BoundContext::default());
    let fine = BoundReport::new(BoundId::Lemma6Left, 2.0, 1.0, BoundContext::default());
    let result =
        SuiteResult { summary: vec![], reports: vec![fine.clone(), bad], instances: 1, deterministic_violations: 1 };
    let err = result.check().unwrap_err();
    assert!(matches!(err, HarnessError::Violation { count: 1, .. }));
    assert_eq!(err.exit_code(), EXIT_VIOLATION);
    let only_left = SuiteResult { summary: vec![], reports: vec![fine], instances: 1, deterministic_violations: 0 };
    only_left.check().unwrap();
}

#[test]
fn train_output_is_rederivable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "train.json",
        &format!(r#"{{"schema_version": {CONFIG_SCHEMA_VERSION}, "algorithm": "bc", "m": 4, "horizon": 200}}"#),
    );
    let out = ilgap(&["train", "--seed", "5"], Some(&cfg), Some(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("train.json")).unwrap();
    let outcome: TrainOutcome = serde_json::from_str(&text).unwrap();
    assert_eq!(outcome.config.seed, 5);
    let env = &outcome.config.environment;
    let mdp: TabularMdp<f64> = make_environment(&ilgap_core::mdp::EnvSpec { gamma: env.gamma, ..env.clone() }).unwrap();
    let expert = ilgap_core::mdp::optimal_policy(&mdp, ilgap_core::mdp::DEFAULT_RL_TOL).unwrap();
    let rerun = check_theorem1(&mdp, &expert, &outcome.policy).unwrap();
    let stored = outcome.bounds.iter().find(|r| r.bound_id == BoundId::Theorem1).unwrap();
    assert_eq!((rerun.lhs, rerun.rhs), (stored.lhs, stored.rhs));
    assert_eq!(rerun.lhs, outcome.value_gap);
}

#[test]
fn env_dump_to_stdout_and_file_agree() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ilgap(&["env", "dump", "--seed", "2"], None, None);
    assert!(stdout.status.success());
    let file = ilgap(&["env", "dump", "--seed", "2"], None, Some(dir.path()));
    assert!(file.status.success());
    assert_eq!(stdout.stdout, std::fs::read(dir.path().join("mdp.json")).unwrap());
    let flat: FlatMdp<f64> = serde_json::from_slice(&stdout.stdout).unwrap();
    assert_eq!(flat.schema_version, ilgap_core::mdp::MDP_SCHEMA_VERSION);
    TabularMdp::try_from(flat).unwrap();
}
