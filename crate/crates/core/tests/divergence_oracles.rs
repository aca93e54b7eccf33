//! Divergences, discriminator distances and complexity measures against
//! brute-force oracles, plus their algebraic properties.

mod common;

use common::{ols_slope, random_distribution, random_mdp, random_policy};
use ilgap_core::divergences::{
    empirical_occupancy, empirical_rademacher, expected_policy_tv, js, kl, lambda_complexity, neural_net_distance,
    per_state_tv, rademacher_complete_exact, rademacher_sup, tv, DemoPair, DemoSet, DiscriminatorClass, FeatureTable,
};
use ilgap_core::mdp::{exact_state_distribution, occupancy, OccupancyMeasure};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn demo_set(indices: &[usize], n_actions: usize) -> DemoSet {
    let pairs = indices
        .iter()
        .enumerate()
        .map(|(i, &x)| DemoPair { state: x / n_actions, action: x % n_actions, trajectory_id: i })
        .collect();
    DemoSet::new(pairs, indices.len(), 0).unwrap()
}

fn random_features(rng: &mut ChaCha8Rng, n: usize, k: usize, dim: usize) -> FeatureTable<f64> {
    let values: Vec<f64> = (0..n * k * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    FeatureTable::new(n, k, dim, values).unwrap()
}

#[test]
fn linear_distance_matches_random_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (n, k, dim) = (4, 3, 3);
    let features = random_features(&mut rng, n, k, dim);
    let bound = 0.8;
    let class = DiscriminatorClass::linear_tight(features.clone(), bound).unwrap();
    let mu = random_distribution(&mut rng, n * k);
    let nu = random_distribution(&mut rng, n * k);
    let closed = neural_net_distance(&mu, &nu, &class).unwrap();
    let diff: Vec<f64> = mu.iter().zip(&nu).map(|(a, b)| a - b).collect();
    let g = features.expectation(&diff);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..1_000_000 {
        let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || norm > 1.0 {
            continue;
        }
        let value = bound * w.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() / norm;
        best = best.max(value);
    }
    assert!(best <= closed + 1e-12, "search {best} exceeds closed form {closed}");
    assert!((closed - best) / closed <= 1e-3, "search {best} vs closed form {closed}");
}

#[test]
fn complete_distance_example() {
    let class = DiscriminatorClass::complete(1.0f64).unwrap();
    assert!((neural_net_distance(&[0.5, 0.5], &[1.0, 0.0], &class).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn complete_rademacher_matches_sign_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in 1..=12usize {
        for grid in [1usize, 3, 6] {
            let indices: Vec<usize> = (0..m).map(|_| rng.gen_range(0..grid)).collect();
            let demos = demo_set(&indices, 1);
            let delta = 0.75f64;
            let class = DiscriminatorClass::complete(delta).unwrap();
            let mut total = 0.0;
            for code in 0u32..(1 << m) {
                let signs: Vec<i8> = (0..m).map(|i| if code >> i & 1 == 1 { 1 } else { -1 }).collect();
                total += rademacher_sup(&class, &indices, &signs);
            }
            let enumerated = total / f64::from(1u32 << m);
            let exact = rademacher_complete_exact(delta, &demos).unwrap();
            assert!((enumerated - exact).abs() <= 1e-12, "m {m}, grid {grid}: {enumerated} vs {exact}");
        }
    }
}

#[test]
fn identical_points_give_expected_absolute_sign_sum() {
    // E|S_4| = (4 * 1 + 2 * 4 + 0 * 6 + 2 * 4 + 4 * 1) / 16 = 1.5
    let demos = demo_set(&[2; 4], 1);
    assert!((rademacher_complete_exact(1.0f64, &demos).unwrap() - 1.5 / 4.0).abs() < 1e-15);
}

#[test]
fn rademacher_decays_at_inverse_square_root() {
    let ms = [16usize, 64, 256, 1024, 4096];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let class = DiscriminatorClass::complete(1.0f64).unwrap();
    let features = random_features(&mut rng, 4, 1, 2);
    let linear = DiscriminatorClass::linear_tight(features, 1.0).unwrap();
    let (mut exact, mut mc): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    for &m in &ms {
        let indices: Vec<usize> = (0..m).map(|_| rng.gen_range(0..4)).collect();
        let demos = demo_set(&indices, 1);
        exact.push(rademacher_complete_exact(1.0f64, &demos).unwrap().ln());
        let est = empirical_rademacher(&class, &demos, 400, m as u64).unwrap();
        assert!((est.estimate - exact.last().unwrap().exp()).abs() <= 4.0 * est.std_error + 1e-12);
        mc.push(empirical_rademacher(&linear, &demos, 400, m as u64).unwrap().estimate.ln());
    }
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    for (name, ys) in [("complete", &exact), ("linear", &mc)] {
        let slope = ols_slope(&xs, ys);
        assert!((slope + 0.5).abs() <= 0.1, "{name} slope {slope}");
    }
}

fn breakpoint_scan(f: &[f64]) -> f64 {
    f.iter().map(|&c| f.iter().map(|&x| (x - c).abs()).sum::<f64>()).fold(f64::INFINITY, f64::min)
}

#[test]
fn lambda_matches_breakpoint_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..50 {
        let (n, k) = (1 + trial % 4, 1 + trial % 3);
        let p = random_distribution(&mut rng, n * k);
        let q = random_distribution(&mut rng, n * k);
        let a = OccupancyMeasure::from_state_action(n, k, p.clone()).unwrap();
        let b = OccupancyMeasure::from_state_action(n, k, q.clone()).unwrap();
        let delta = 0.5 + trial as f64 / 50.0;
        let f: Vec<f64> = p.iter().zip(&q).map(|(x, y)| x.ln() - y.ln()).collect();
        let lambda = lambda_complexity(&a, &b, &DiscriminatorClass::complete(delta).unwrap()).unwrap();
        assert!((lambda - breakpoint_scan(&f) / delta).abs() <= 1e-12);
    }
}

#[test]
fn lambda_vanishes_on_constant_log_ratio() {
    let p = OccupancyMeasure::from_state_action(2, 1, vec![0.3, 0.7]).unwrap();
    let class = DiscriminatorClass::complete(1.0f64).unwrap();
    assert_eq!(lambda_complexity(&p, &p, &class).unwrap(), 0.0);
}

#[test]
fn empirical_occupancy_converges_at_inverse_square_root() {
    let mdp = random_mdp(3, 2, 0.9, 5);
    let pi = random_policy(3, 2, 6);
    let truth = occupancy(&mdp, &pi).unwrap();
    let ms = [256usize, 1024, 4096, 16384];
    let mut ys = Vec::new();
    for &m in &ms {
        let mean_tv = (0..20u64)
            .map(|r| {
                let demos = DemoSet::discounted_resample(&mdp, &pi, m, 1000, 1000 * m as u64 + r).unwrap();
                let rho = empirical_occupancy::<f64>(&demos, 3, 2).unwrap();
                tv(&rho, truth.state_action_dist()).unwrap()
            })
            .sum::<f64>()
            / 20.0;
        ys.push(mean_tv.ln());
    }
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let slope = ols_slope(&xs, &ys);
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
}

#[test]
fn expected_policy_tv_is_weighted_per_state_tv() {
    for seed in 0..10u64 {
        let mdp = random_mdp(6, 3, 0.9, seed);
        let (pi_e, pi) = (random_policy(6, 3, seed + 50), random_policy(6, 3, seed + 60));
        let d = exact_state_distribution(&mdp, &pi_e).unwrap();
        let direct: f64 = per_state_tv(&pi, &pi_e).unwrap().iter().zip(&d).map(|(t, w)| t * w).sum();
        assert!((expected_policy_tv(&mdp, &pi_e, &pi).unwrap() - direct).abs() < 1e-14);
    }
}

fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 1e-6f64..1.0], len).prop_filter_map("all zero", |w| {
        let total: f64 = w.iter().sum();
        (total > 0.0).then(|| w.iter().map(|x| x / total).collect())
    })
}

fn positive_distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..1.0, len).prop_map(|w| {
        let total: f64 = w.iter().sum();
        w.iter().map(|x| x / total).collect()
    })
}

fn pair(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_len).prop_flat_map(|len| (distribution(len), distribution(len)))
}

proptest! {
    #[test]
    fn pinsker_holds((p, q) in pair(12)) {
        if let Ok(k) = kl(&p, &q) {
            prop_assert!(tv(&p, &q).unwrap() <= (k.max(0.0) / 2.0).sqrt() + 1e-9);
        }
    }

    #[test]
    fn js_dominates_half_squared_tv((p, q) in pair(12)) {
        let t = tv(&p, &q).unwrap();
        let j = js(&p, &q).unwrap();
        prop_assert!(j >= 0.5 * t * t - 1e-9);
        prop_assert!(j <= std::f64::consts::LN_2 + 1e-12);
        prop_assert!((js(&q, &p).unwrap() - j).abs() < 1e-12);
    }

    #[test]
    fn complete_distance_is_twice_delta_tv((p, q) in pair(12), delta in 0.01f64..10.0) {
        let class = DiscriminatorClass::complete(delta).unwrap();
        let d = neural_net_distance(&p, &q, &class).unwrap();
        prop_assert!((d - 2.0 * delta * tv(&p, &q).unwrap()).abs() <= 1e-12 * delta.max(1.0));
    }

    #[test]
    fn linear_class_left_sandwich(seed in any::<u64>(), len in 1usize..10, bound in 0.1f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let features = random_features(&mut rng, len, 1, 3);
        let class = DiscriminatorClass::linear_tight(features, bound).unwrap();
        let p = random_distribution(&mut rng, len);
        let q = random_distribution(&mut rng, len);
        let d = neural_net_distance(&p, &q, &class).unwrap();
        prop_assert!(d / class.delta() <= 2.0 * tv(&p, &q).unwrap() + 1e-12);
        prop_assert!(d >= 0.0);
    }

    #[test]
    fn complete_class_right_sandwich(
        (p, q) in (1usize..10).prop_flat_map(|len| (positive_distribution(len), positive_distribution(len))),
        delta in 0.1f64..5.0,
    ) {
        let n = p.len();
        let a = OccupancyMeasure::from_state_action(n, 1, p.clone()).unwrap();
        let b = OccupancyMeasure::from_state_action(n, 1, q.clone()).unwrap();
        let class = DiscriminatorClass::complete(delta).unwrap();
        let lambda = lambda_complexity(&a, &b, &class).unwrap();
        let d = neural_net_distance(&p, &q, &class).unwrap();
        prop_assert!(tv(&p, &q).unwrap() <= (2.0 * lambda * d).sqrt() + 1e-9);
    }

    #[test]
    fn rademacher_lies_between_zero_and_delta(
        indices in prop::collection::vec(0usize..6, 1..40),
        delta in 0.1f64..3.0,
        seed in any::<u64>(),
    ) {
        let demos = demo_set(&indices, 2);
        let class = DiscriminatorClass::complete(delta).unwrap();
        let est = empirical_rademacher(&class, &demos, 32, seed).unwrap();
        prop_assert!(est.estimate >= 0.0 && est.estimate <= delta + 1e-12);
        let exact = rademacher_complete_exact(delta, &demos).unwrap();
        prop_assert!(exact >= 0.0 && exact <= delta + 1e-12);
    }
}
