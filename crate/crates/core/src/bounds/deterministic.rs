use crate::divergences::{expected_policy_tv, js, kl, lambda_complexity, neural_net_distance, tv, DiscriminatorClass};
use crate::error::{Error, Result};
use crate::mdp::{exact_state_distribution, occupancy, policy_value_exact, OccupancyMeasure, TabularMdp, TabularPolicy};
use crate::scalar::{kahan_sum, Scalar};

use super::formulas;
use super::{BoundContext, BoundId, BoundReport};

fn context<T: Scalar>(mdp: &TabularMdp<T>) -> BoundContext {
    BoundContext::with_gamma(mdp.gamma().as_f64())
}

fn check_pair<T: Scalar>(mdp: &TabularMdp<T>, pi_e: &TabularPolicy<T>, pi: &TabularPolicy<T>) -> Result<()> {
    pi_e.check_shape(mdp.n_states(), mdp.n_actions())?;
    pi.check_shape(mdp.n_states(), mdp.n_actions())
}

fn value_gap<T: Scalar>(mdp: &TabularMdp<T>, pi_e: &TabularPolicy<T>, pi: &TabularPolicy<T>) -> Result<T> {
    Ok((policy_value_exact(mdp, pi)? - policy_value_exact(mdp, pi_e)?).abs())
}

/// `TV(d_pi, d_E) <= gamma / (1 - gamma) * E_dE[TV(pi, pi_E)]`.
pub fn check_lemma1<T: Scalar>(mdp: &TabularMdp<T>, pi_e: &TabularPolicy<T>, pi: &TabularPolicy<T>) -> Result<BoundReport<T>> {
    check_pair(mdp, pi_e, pi)?;
    let lhs = tv(&exact_state_distribution(mdp, pi)?, &exact_state_distribution(mdp, pi_e)?)?;
    let rhs = formulas::lemma1_rhs(mdp.gamma(), expected_policy_tv(mdp, pi_e, pi)?);
    Ok(BoundReport::new(BoundId::Lemma1, lhs, rhs, context(mdp)))
}

/// `TV(rho_pi, rho_E) <= E_dE[TV(pi, pi_E)] / (1 - gamma)`.
pub fn check_lemma2<T: Scalar>(mdp: &TabularMdp<T>, pi_e: &TabularPolicy<T>, pi: &TabularPolicy<T>) -> Result<BoundReport<T>> {
    check_pair(mdp, pi_e, pi)?;
    let lhs = tv(occupancy(mdp, pi)?.state_action_dist(), occupancy(mdp, pi_e)?.state_action_dist())?;
    let rhs = formulas::lemma2_rhs(mdp.gamma(), expected_policy_tv(mdp, pi_e, pi)?);
    Ok(BoundReport::new(BoundId::Lemma2, lhs, rhs, context(mdp)))
}

/// `|V^pi - V^E| <= 2 R / (1 - gamma) * TV(rho_pi, rho_E)`.
pub fn check_lemma3<T: Scalar>(mdp: &TabularMdp<T>, pi_e: &TabularPolicy<T>, pi: &TabularPolicy<T>) -> Result<BoundReport<T>> {
    check_pair(mdp, pi_e, pi)?;
    let occ_tv = tv(occupancy(mdp, pi)?.state_action_dist(), occupancy(mdp, pi_e)?.state_action_dist())?;
    let rhs = formulas::lemma3_rhs(mdp.gamma(), mdp.r_max(), occ_tv);
    Ok(BoundReport::new(BoundId::Lemma3, value_gap(mdp, pi_e, pi)?, rhs, context(mdp)))
}

/// `|V^bc - V^E| <= 2 R / (1 - gamma)^2 * E_dE[TV(pi_bc, pi_E)]`.
pub fn check_theorem1<T: Scalar>(mdp: &TabularMdp<T>, pi_e: &TabularPolicy<T>, pi_bc: &TabularPolicy<T>) -> Result<BoundReport<T>> {
    check_pair(mdp, pi_e, pi_bc)?;
    let rhs = formulas::theorem1_rhs(mdp.gamma(), mdp.r_max(), expected_policy_tv(mdp, pi_e, pi_bc)?);
    Ok(BoundReport::new(BoundId::Theorem1, value_gap(mdp, pi_e, pi_bc)?, rhs, context(mdp)))
}

/// `|V^bc - V^E| <= sqrt(2) R / (1 - gamma)^2 * E_dE[sqrt(KL(pi_bc(.|s) || pi_E(.|s)))]`.
///
/// When `pi_bc` puts mass on an action the expert never takes at a state the
/// expert visits, the right side is `+inf` and the report holds trivially.
pub fn check_theorem1_kl<T: Scalar>(
    mdp: &TabularMdp<T>,
    pi_e: &TabularPolicy<T>,
    pi_bc: &TabularPolicy<T>,
) -> Result<BoundReport<T>> {
    check_pair(mdp, pi_e, pi_bc)?;
    let d_e = exact_state_distribution(mdp, pi_e)?;
    let mut terms = Vec::with_capacity(mdp.n_states());
    let mut undefined_at = None;
    for (s, &w) in d_e.iter().enumerate() {
        if w == T::zero() {
            continue;
        }
        match kl(pi_bc.probs(s), pi_e.probs(s)) {
            Ok(v) => terms.push(w * v.max(T::zero()).sqrt()),
            Err(Error::SupportViolation(_)) => {
                undefined_at = Some(s);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let mut ctx = context(mdp);
    let rhs = match undefined_at {
        Some(s) => {
            ctx.note = Some(format!("KL undefined at state {s}"));
            T::infinity()
        }
        None => formulas::theorem1_kl_rhs(mdp.gamma(), mdp.r_max(), kahan_sum(terms)),
    };
    Ok(BoundReport::new(BoundId::Theorem1Kl, value_gap(mdp, pi_e, pi_bc)?, rhs, ctx))
}

/// `|V^ga - V^E| <= 2 sqrt(2) R / (1 - gamma) * sqrt(JS(rho_ga, rho_E))`.
pub fn check_theorem3<T: Scalar>(mdp: &TabularMdp<T>, pi_e: &TabularPolicy<T>, pi_ga: &TabularPolicy<T>) -> Result<BoundReport<T>> {
    check_pair(mdp, pi_e, pi_ga)?;
    let j = js(occupancy(mdp, pi_ga)?.state_action_dist(), occupancy(mdp, pi_e)?.state_action_dist())?;
    let rhs = formulas::theorem3_rhs(mdp.gamma(), mdp.r_max(), j);
    Ok(BoundReport::new(BoundId::Theorem3, value_gap(mdp, pi_e, pi_ga)?, rhs, context(mdp)))
}

/// `TV(p, q)^2 / 2 <= JS(p, q)`.
pub fn check_eq14<T: Scalar>(p: &[T], q: &[T]) -> Result<BoundReport<T>> {
    let t = tv(p, q)?;
    Ok(BoundReport::new(BoundId::Eq14JsTv, T::lit(0.5) * t * t, js(p, q)?, BoundContext::default()))
}

/// `TV(p, q) <= sqrt(KL(p || q) / 2)`; `+inf` on the right when `p` is not
/// absolutely continuous with respect to `q`.
pub fn check_pinsker<T: Scalar>(p: &[T], q: &[T]) -> Result<BoundReport<T>> {
    let lhs = tv(p, q)?;
    let rhs = match kl(p, q) {
        Ok(v) => (v.max(T::zero()) / T::lit(2.0)).sqrt(),
        Err(Error::SupportViolation(_)) => T::infinity(),
        Err(e) => return Err(e),
    };
    Ok(BoundReport::new(BoundId::Pinsker, lhs, rhs, BoundContext::default()))
}

/// Both halves of `(1/Delta) d_D <= TV <= sqrt(2 Lambda d_D)`.
///
/// The right half needs strictly positive occupancies and the complete class;
/// it is `None` otherwise. The left half is always evaluated, and for the
/// complete class it fails whenever the occupancies differ because
/// `d_D = 2 Delta TV` there.
pub fn check_lemma6<T: Scalar>(
    rho_pi: &OccupancyMeasure<T>,
    rho_e: &OccupancyMeasure<T>,
    dclass: &DiscriminatorClass<T>,
) -> Result<(BoundReport<T>, Option<BoundReport<T>>)> {
    let (p, q) = (rho_pi.state_action_dist(), rho_e.state_action_dist());
    let d = neural_net_distance(p, q, dclass)?;
    let t = tv(p, q)?;
    let mut ctx = BoundContext { note: Some(dclass.variant_name().to_string()), ..BoundContext::default() };
    let left = BoundReport::new(BoundId::Lemma6Left, d / dclass.delta(), t, ctx.clone());
    let right = match lambda_complexity(rho_pi, rho_e, dclass) {
        Ok(lambda) => {
            ctx.note = Some(format!("{}; lambda = {}", dclass.variant_name(), lambda));
            Some(BoundReport::new(BoundId::Lemma6Right, t, formulas::lemma6_right_rhs(lambda, d), ctx))
        }
        Err(Error::NonPositiveDensity(_)) | Err(Error::UnsupportedClass(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((left, right))
}
