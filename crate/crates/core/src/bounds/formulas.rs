//! Right-hand sides of the bounds as pure functions of their ingredients.

use crate::scalar::Scalar;

fn two<T: Scalar>() -> T {
    T::lit(2.0)
}

/// State-distribution shift: `gamma / (1 - gamma) * E_dE[TV]`.
pub fn lemma1_rhs<T: Scalar>(gamma: T, expected_tv: T) -> T {
    gamma / (T::one() - gamma) * expected_tv
}

/// State-action shift: `E_dE[TV] / (1 - gamma)`.
pub fn lemma2_rhs<T: Scalar>(gamma: T, expected_tv: T) -> T {
    expected_tv / (T::one() - gamma)
}

/// Value gap from occupancy TV: `2 R / (1 - gamma) * TV(rho, rho_E)`.
pub fn lemma3_rhs<T: Scalar>(gamma: T, r_max: T, occupancy_tv: T) -> T {
    two::<T>() * r_max / (T::one() - gamma) * occupancy_tv
}

/// BC value gap: `2 R / (1 - gamma)^2 * E_dE[TV]`.
pub fn theorem1_rhs<T: Scalar>(gamma: T, r_max: T, expected_tv: T) -> T {
    let h = T::one() - gamma;
    two::<T>() * r_max / (h * h) * expected_tv
}

/// BC value gap in KL form: `sqrt(2) R / (1 - gamma)^2 * E_dE[sqrt(KL)]`.
pub fn theorem1_kl_rhs<T: Scalar>(gamma: T, r_max: T, expected_sqrt_kl: T) -> T {
    let h = T::one() - gamma;
    T::SQRT_2() * r_max / (h * h) * expected_sqrt_kl
}

/// GAIL value gap from occupancy JS: `2 sqrt(2) R / (1 - gamma) * sqrt(JS)`.
pub fn theorem3_rhs<T: Scalar>(gamma: T, r_max: T, js: T) -> T {
    two::<T>() * T::SQRT_2() * r_max / (T::one() - gamma) * js.max(T::zero()).sqrt()
}

/// `ln |Pi|` for deterministic tabular policies, `n ln k`.
pub fn log_policy_count<T: Scalar>(n_states: usize, n_actions: usize) -> T {
    T::from_count(n_states) * T::from_count(n_actions).ln()
}

/// BC generalization: `eps_hat + sqrt((ln|Pi| + ln(2/delta)) / (2m))`.
pub fn lemma4_rhs<T: Scalar>(empirical_loss: T, log_policy_count: T, m: usize, delta: T) -> T {
    empirical_loss + ((log_policy_count + (two::<T>() / delta).ln()) / (two::<T>() * T::from_count(m))).sqrt()
}

/// BC value gap with a generalization term: `2 R / (1 - gamma)^2 * (eps_hat + sqrt((ln|Pi| + ln(2/delta)) / (2m)))`.
pub fn theorem2_rhs<T: Scalar>(gamma: T, r_max: T, empirical_loss: T, log_policy_count: T, m: usize, delta: T) -> T {
    theorem1_rhs(gamma, r_max, lemma4_rhs(empirical_loss, log_policy_count, m, delta))
}

/// Confidence term `2 Delta sqrt(2 ln(1/delta) / m)`.
pub fn confidence_term<T: Scalar>(delta_bound: T, m: usize, delta: T) -> T {
    two::<T>() * delta_bound * (two::<T>() * (T::one() / delta).ln() / T::from_count(m)).sqrt()
}

/// Neural-distance generalization:
/// `inf + eps + 4 R_hat + 2 Delta sqrt(2 ln(1/delta) / m)`.
pub fn lemma5_rhs<T: Scalar>(inf_term: T, epsilon: T, rademacher: T, delta_bound: T, m: usize, delta: T) -> T {
    inf_term + epsilon + T::lit(4.0) * rademacher + confidence_term(delta_bound, m, delta)
}

/// Upper half of the neural-distance/TV sandwich: `sqrt(2 Lambda d)`.
pub fn lemma6_right_rhs<T: Scalar>(lambda: T, distance: T) -> T {
    (two::<T>() * lambda * distance.max(T::zero())).sqrt()
}

/// Bracket shared by the TV and value bounds for GAIL:
/// `inf + sqrt(eps) + 2 sqrt(R_hat) + 2 Delta sqrt(2 ln(1/delta) / m)`.
pub fn gail_bracket<T: Scalar>(inf_term: T, epsilon: T, rademacher: T, delta_bound: T, m: usize, delta: T) -> T {
    inf_term
        + epsilon.max(T::zero()).sqrt()
        + two::<T>() * rademacher.max(T::zero()).sqrt()
        + confidence_term(delta_bound, m, delta)
}

/// GAIL occupancy TV: `sqrt(2 Lambda) * bracket`.
pub fn lemma7_rhs<T: Scalar>(lambda: T, bracket: T) -> T {
    (two::<T>() * lambda).sqrt() * bracket
}

/// GAIL value gap: `2 R sqrt(2 Lambda) / (1 - gamma) * bracket`.
pub fn theorem5_rhs<T: Scalar>(gamma: T, r_max: T, lambda: T, bracket: T) -> T {
    two::<T>() * r_max * (two::<T>() * lambda).sqrt() / (T::one() - gamma) * bracket
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma2_composed_into_lemma3_is_theorem1() {
        for &gamma in &[0.05, 0.5, 0.9, 0.99, 0.999] {
            for &(r, e) in &[(1.0, 0.3), (2.5, 0.01), (0.1, 1.0)] {
                let chained = lemma3_rhs(gamma, r, lemma2_rhs(gamma, e));
                let direct: f64 = theorem1_rhs(gamma, r, e);
                assert!((chained - direct).abs() <= 1e-12 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn theorem2_is_theorem1_of_the_generalization_term() {
        let g: f64 = theorem2_rhs(0.9, 1.0, 0.1, log_policy_count(3, 2), 40, 0.05);
        let expected = 200.0 * (0.1 + ((3.0 * 2f64.ln() + 40f64.ln()) / 80.0).sqrt());
        assert!((g - expected).abs() < 1e-9);
    }

    #[test]
    fn theorem5_prefactor_scales_with_effective_horizon() {
        let a: f64 = theorem5_rhs(0.9, 1.0, 0.7, 0.4);
        let b: f64 = theorem5_rhs(0.95, 1.0, 0.7, 0.4);
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn delta_terms_scale_linearly() {
        let base: f64 = confidence_term(1.0, 25, 0.1);
        assert!((confidence_term(2.0, 25, 0.1) - 2.0 * base).abs() < 1e-15);
        assert!((lemma4_rhs(0.0, log_policy_count(1, 4), 25, 0.1) - ((4f64.ln() + 20f64.ln()) / 50.0).sqrt()).abs() < 1e-15);
    }
}
