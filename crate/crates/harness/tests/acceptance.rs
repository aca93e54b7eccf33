//! Acceptance criteria. Runs as a plain binary (no libtest harness) so that
//! the one-line verdict per criterion is always printed; exits nonzero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ilgap::config::{BoundSuiteConfig, ProbabilisticSettings, SweepConfig};
use ilgap::stats::ols_slope;
use ilgap::{run_bound_suite, run_horizon_sweep, run_sample_sweep, Algorithm};
use ilgap_core::bounds::BoundId;
use ilgap_core::divergences::{rademacher_complete_exact, tv, DemoPair, DemoSet, DiscriminatorClass};
use ilgap_core::learners::{gail_train, GailConfig};
use ilgap_core::mdp::{
    exact_state_distribution, make_environment, monte_carlo_value, occupancy, optimal_policy, policy_value_bellman,
    policy_value_exact, sample_trajectories, CliffGridParams, EnvKind, EnvSpec, TabularMdp, TabularPolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

const DETERMINISTIC_IDS: [BoundId; 8] = [
    BoundId::Lemma1,
    BoundId::Lemma2,
    BoundId::Lemma3,
    BoundId::Theorem1,
    BoundId::Theorem1Kl,
    BoundId::Theorem3,
    BoundId::Eq14JsTv,
    BoundId::Pinsker,
];

fn deterministic_suite() -> Verdict {
    let start = Instant::now();
    let config = BoundSuiteConfig {
        probabilistic: ProbabilisticSettings { enabled: false, ..ProbabilisticSettings::default() },
        ..BoundSuiteConfig::default()
    };
    let result = run_bound_suite(&config).expect("suite runs");
    let elapsed = start.elapsed();
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    let mut counted = true;
    for id in DETERMINISTIC_IDS {
        match result.row(id) {
            Some(row) => {
                worst = worst.min(row.min_slack);
                violations += result.reports.iter().filter(|r| r.bound_id == id && r.slack < -1e-9).count();
                counted &= row.instances == result.instances;
            }
            None => counted = false,
        }
    }
    let pass = result.instances >= 200 && counted && violations == 0 && elapsed < Duration::from_secs(120);
    verdict(
        pass,
        format!(
            "{} instances, {violations} violations, min slack {worst:.3e}, {:.1}s (limit 120s)",
            result.instances,
            elapsed.as_secs_f64()
        ),
    )
}

fn random_policy(rng: &mut ChaCha8Rng, n: usize, k: usize) -> TabularPolicy<f64> {
    let mut probs = Vec::with_capacity(n * k);
    for _ in 0..n {
        let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-12).collect();
        let total: f64 = raw.iter().sum();
        probs.extend(raw.into_iter().map(|x| x / total));
    }
    TabularPolicy::new(n, k, probs).unwrap()
}

/// `(1 - gamma) sum_t gamma^t d0 P^t`, summed until the tail is below 1e-15.
fn power_series_distribution(mdp: &TabularMdp<f64>, pi: &TabularPolicy<f64>) -> Vec<f64> {
    let (n, k, gamma) = (mdp.n_states(), mdp.n_actions(), mdp.gamma());
    let mut current = mdp.init_dist().to_vec();
    let mut total = vec![0.0; n];
    let mut weight = 1.0 - gamma;
    let mut tail = 1.0;
    while tail > 1e-15 {
        for (t, c) in total.iter_mut().zip(&current) {
            *t += weight * c;
        }
        let mut next = vec![0.0; n];
        for (s, &c) in current.iter().enumerate() {
            for a in 0..k {
                let w = c * pi.prob(s, a);
                for (x, p) in next.iter_mut().zip(mdp.next_dist(s, a)) {
                    *x += w * p;
                }
            }
        }
        current = next;
        weight *= gamma;
        tail *= gamma;
    }
    total
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_series, mut worst_bellman, mut covered) = (0.0f64, 0.0f64, 0);
    for i in 0..100u64 {
        let gamma = [0.5, 0.9, 0.99][i as usize % 3];
        let n = rng.gen_range(2..=20);
        let k = rng.gen_range(1..=5);
        let spec = EnvSpec::new(EnvKind::Random { n_states: n, n_actions: k, branching: None }, gamma, i);
        let mdp: TabularMdp<f64> = make_environment(&spec).unwrap();
        let pi = random_policy(&mut rng, n, k);
        let exact = exact_state_distribution(&mdp, &pi).unwrap();
        let series = power_series_distribution(&mdp, &pi);
        worst_series = exact.iter().zip(&series).map(|(a, b)| (a - b).abs()).fold(worst_series, f64::max);
        let v = policy_value_exact(&mdp, &pi).unwrap();
        worst_bellman = worst_bellman.max((v - policy_value_bellman(&mdp, &pi).unwrap()).abs());
        let trajs = sample_trajectories(&mdp, &pi, 1000, 20, 7_000 + i).unwrap();
        let mc = monte_carlo_value(&trajs, gamma).unwrap();
        if (mc.mean - v).abs() <= 3.0 * mc.std_error {
            covered += 1;
        }
    }
    let pass = worst_series <= 1e-10 && worst_bellman <= 1e-8 && covered >= 95;
    verdict(
        pass,
        format!(
            "power series err {worst_series:.2e} (<= 1e-10), Bellman err {worst_bellman:.2e} (<= 1e-8), MC within 3 SE on {covered}/100 (>= 95)"
        ),
    )
}

fn horizon_dependency() -> Verdict {
    let start = Instant::now();
    let result = run_horizon_sweep(&SweepConfig::default()).expect("horizon sweep runs");
    let elapsed = start.elapsed();
    let (bc, gail) = (result.slope(Algorithm::Bc), result.slope(Algorithm::Gail));
    let failed = result.failed_rows().count();
    let expert_ok = result.rows.iter().filter(|r| r.algorithm == Algorithm::Expert).all(|r| r.value_gap_exact <= 1e-10);
    let pass = match (bc, gail) {
        (Some(b), Some(g)) => {
            b >= g + 0.5 && (1.3..=2.7).contains(&b) && failed == 0 && expert_ok && elapsed < Duration::from_secs(600)
        }
        _ => false,
    };
    verdict(
        pass,
        format!(
            "slope(BC) {} slope(GAIL) {} (need BC >= GAIL + 0.5, BC in [1.3, 2.7]), {failed} failed cells, expert control {}, {:.1}s (limit 600s)",
            fmt_opt(bc),
            fmt_opt(gail),
            if expert_ok { "zero" } else { "NONZERO" },
            elapsed.as_secs_f64()
        ),
    )
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("absent".into(), |v| format!("{v:.3}"))
}

fn sample_complexity() -> Verdict {
    let result = run_sample_sweep(&SweepConfig::default()).expect("sample sweep runs");
    let gamma = result.config.gammas()[0];
    let mut parts = Vec::new();
    let mut pass = result.failed_rows().count() == 0 && gamma == 0.999;
    for &m in result.config.ms() {
        let (bc, gail) = (result.median(Algorithm::Bc, gamma, m), result.median(Algorithm::Gail, gamma, m));
        let ok = matches!((bc, gail), (Some(b), Some(g)) if g <= b);
        pass &= ok;
        parts.push(format!("m={m}: GAIL {} vs BC {}", fmt_opt(gail), fmt_opt(bc)));
    }
    let learners: Vec<_> = result.monotonicity.iter().filter(|c| c.algorithm != Algorithm::Expert).collect();
    let rises: Vec<String> = learners
        .iter()
        .filter(|c| !c.non_increasing)
        .map(|c| format!("{} {}->{}", c.algorithm, c.m_from, c.m_to))
        .collect();
    pass &= !learners.is_empty() && rises.is_empty();
    verdict(
        pass,
        format!(
            "{}; non-increasing in m within bootstrap tolerance for {}/{} steps{}",
            parts.join(", "),
            learners.len() - rises.len(),
            learners.len(),
            if rises.is_empty() { String::new() } else { format!(" (rises: {})", rises.join(", ")) }
        ),
    )
}

fn probabilistic_bounds() -> Verdict {
    let config = BoundSuiteConfig { instances: 0, ..BoundSuiteConfig::default() };
    let result = run_bound_suite(&config).expect("suite runs");
    let mut pass = true;
    let mut parts = Vec::new();
    for (id, trials) in [
        (BoundId::Lemma4Generalization, 500),
        (BoundId::Lemma5NeuralGen, 100),
        (BoundId::Lemma7Tv, 100),
        (BoundId::Theorem5Value, 100),
    ] {
        match result.row(id) {
            Some(row) => {
                pass &= row.instances == trials && row.violation_rate <= 0.1;
                parts.push(format!("{} {:.3} over {}", id.as_str(), row.violation_rate, row.instances));
            }
            None => {
                pass = false;
                parts.push(format!("{} missing", id.as_str()));
            }
        }
    }
    verdict(pass, format!("violation rates (<= 0.1): {}", parts.join(", ")))
}

fn gail_optimizer_quality() -> Verdict {
    let spec = EnvSpec::new(EnvKind::CliffGrid(CliffGridParams::new(5, 5, 0.1)), 0.9, 0);
    let mdp: TabularMdp<f64> = make_environment(&spec).unwrap();
    let expert = optimal_policy(&mdp, 1e-10).unwrap();
    let rho_e = occupancy(&mdp, &expert).unwrap();
    let mut config = GailConfig::new(DiscriminatorClass::complete(1.0).unwrap(), 500);
    config.gap_tolerance = 1e-2;
    let report = gail_train(&mdp, rho_e.state_action_dist(), &config, 0).unwrap();
    let learned = occupancy(&mdp, &report.final_policy).unwrap();
    let distance = tv(learned.state_action_dist(), rho_e.state_action_dist()).unwrap();
    let gap = report.duality_gap;
    let pass = gap <= 1e-2 && report.iterations() <= 500 && distance <= gap / 2.0 + 1e-6;
    verdict(
        pass,
        format!(
            "gap {gap:.3e} after {} iterations (<= 1e-2 within 500), TV {distance:.3e} (<= gap/2 + 1e-6 = {:.3e})",
            report.iterations(),
            gap / 2.0 + 1e-6
        ),
    )
}

fn demo_set(cells: &[usize]) -> DemoSet {
    let pairs = cells.iter().enumerate().map(|(i, &c)| DemoPair { state: c, action: 0, trajectory_id: i }).collect();
    DemoSet::new(pairs, cells.len(), 0).unwrap()
}

/// `E_sigma[sup_D (1/m) sum_i sigma_i D(x_i)]` over all sign vectors, with the
/// supremum taken cell by cell: `D(x) = delta * sign(sum of signs at x)`.
fn enumerated_rademacher(cells: &[usize], n_cells: usize, delta: f64) -> f64 {
    let m = cells.len();
    let mut total = 0.0;
    for code in 0u32..(1 << m) {
        let mut sums = vec![0i64; n_cells];
        for (i, &c) in cells.iter().enumerate() {
            sums[c] += if code >> i & 1 == 1 { 1 } else { -1 };
        }
        total += delta * sums.iter().map(|s| s.unsigned_abs() as f64).sum::<f64>() / m as f64;
    }
    total / f64::from(1u32 << m)
}

fn rademacher_estimator() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for m in 1..=12usize {
        for n_cells in [1usize, 2, 5] {
            let cells: Vec<usize> = (0..m).map(|_| rng.gen_range(0..n_cells)).collect();
            let closed = rademacher_complete_exact(0.6f64, &demo_set(&cells)).unwrap();
            worst = worst.max((closed - enumerated_rademacher(&cells, n_cells, 0.6)).abs());
        }
    }
    let ms = [16usize, 64, 256, 1024, 4096];
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &m in &ms {
        let cells: Vec<usize> = (0..m).map(|_| rng.gen_range(0..4)).collect();
        xs.push((m as f64).ln());
        ys.push(rademacher_complete_exact(1.0f64, &demo_set(&cells)).unwrap().ln());
    }
    let slope = ols_slope(&xs, &ys).unwrap_or(f64::NAN);
    let pass = worst <= 1e-12 && (slope + 0.5).abs() <= 0.1;
    verdict(pass, format!("closed form vs 2^m enumeration max err {worst:.1e} for m <= 12, decay exponent {slope:.3} (-0.5 +/- 0.1)"))
}

fn determinism() -> Verdict {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_ilgap"))
            .args(["sweep-horizon", "--seed", "0", "--out"])
            .arg(dir.path())
            .output()
            .expect("binary runs");
        if !status.status.success() {
            return verdict(false, format!("sweep-horizon exited with {}", status.status));
        }
    }
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap_or_default();
    let csv_same = read(dirs[0].path(), "sweep_horizon.csv") == read(dirs[1].path(), "sweep_horizon.csv");
    let json_same = read(dirs[0].path(), "sweep_horizon.json") == read(dirs[1].path(), "sweep_horizon.json");
    let nonempty = !read(dirs[0].path(), "sweep_horizon.csv").is_empty();
    verdict(
        csv_same && json_same && nonempty,
        format!("CSV {}, JSON {}", if csv_same { "identical" } else { "DIFFERS" }, if json_same { "identical" } else { "DIFFERS" }),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("deterministic bound suite", deterministic_suite),
        ("oracle equivalence", oracle_equivalence),
        ("horizon dependency", horizon_dependency),
        ("sample complexity", sample_complexity),
        ("probabilistic generalization bounds", probabilistic_bounds),
        ("GAIL optimizer quality", gail_optimizer_quality),
        ("Rademacher estimator", rademacher_estimator),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {} {:<36} {} [{:.1}s] {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
