//! One-bit feedback: each user reports whether its gain exceeds `ξ`.
//!
//! Users below the threshold form `S₁`, the rest `S₂`. The weak user is
//! drawn from `S₁` and the strong user from `S₂`; when one set is empty both
//! are drawn from the other.

use super::gain::GainDistribution;
use super::{Access, Role, POISSON_TRUNCATION_TAIL};
use crate::error::QuadratureError;
use crate::mathkit::{binomial, poisson_pmf, poisson_truncation};
use crate::noma::{eta_thresholds, oma_rate_threshold, EtaThresholds};

/// How the feedback threshold `ξ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ThresholdRule {
    Fixed(f64),
    /// `(η̃₁ + η̃₂)/2`.
    #[default]
    Midpoint,
    /// `η̃₂ − ρ^{−K}`.
    EtaGap,
}

impl ThresholdRule {
    pub fn threshold(&self, eta: &EtaThresholds, k: usize, rho: f64) -> f64 {
        match *self {
            ThresholdRule::Fixed(xi) => xi,
            ThresholdRule::Midpoint => 0.5 * (eta.weak + eta.strong),
            ThresholdRule::EtaGap => eta.strong - rho.powi(-(k as i32)),
        }
    }
}

/// `P(|S₂| = n)` among `k` users.
pub fn onebit_set_pmf(dist: &GainDistribution, n: usize, k: usize, xi: f64) -> Result<f64, QuadratureError> {
    assert!(n <= k, "set size {n} exceeds {k} users");
    let below = dist.cdf(xi)?;
    Ok(binomial(k as u64, n as u64) * below.powi((k - n) as i32) * (1.0 - below).powi(n as i32))
}

/// `(F_S1(y), F_S2(y))`: gain CDFs of a user known to lie below or above `ξ`.
pub fn onebit_conditional_cdfs(dist: &GainDistribution, y: f64, xi: f64) -> Result<(f64, f64), QuadratureError> {
    let below = dist.cdf(xi)?;
    let above = dist.survival(xi)?;
    let f1 = if below > 0.0 { dist.cdf(y.min(xi))? / below } else { 1.0 };
    let f2 = if above > 0.0 { dist.cdf_difference(xi, y)? / above } else { 0.0 };
    Ok((f1.clamp(0.0, 1.0), f2.clamp(0.0, 1.0)))
}

/// Outage of the user scheduled in `role` among `k ≥ 2` users. The
/// threshold always comes from the NOMA η̃ levels; with `Access::Oma` the
/// selected users are judged against the doubled-rate OMA targets.
pub fn onebit_outage(
    dist: &GainDistribution,
    role: Role,
    k: usize,
    rule: ThresholdRule,
    rho: f64,
    access: Access,
) -> Result<f64, QuadratureError> {
    assert!(k >= 2, "a pair needs at least two users");
    let p = dist.params();
    let eta = eta_thresholds(&p.split, &p.rates, rho);
    let xi = match (eta, rule) {
        (_, ThresholdRule::Fixed(xi)) => xi,
        (Some(eta), rule) => rule.threshold(&eta, k, rho),
        (None, _) => 0.0,
    };
    let y = match (access, eta) {
        (Access::Noma, None) => return Ok(1.0),
        (Access::Noma, Some(eta)) => match role {
            Role::Weak => eta.weak,
            Role::Strong => eta.strong,
        },
        (Access::Oma, _) => {
            let rate = match role {
                Role::Weak => p.rates.weak_rate(),
                Role::Strong => p.rates.strong_rate(),
            };
            oma_rate_threshold(rate) / rho
        }
    };
    let below = dist.cdf(xi)?;
    let none_above = below.powi(k as i32);
    let none_below = (1.0 - below).powi(k as i32);
    let (f1, f2) = onebit_conditional_cdfs(dist, y, xi)?;
    Ok(match role {
        Role::Weak => f1 * (1.0 - none_below) + none_below * f2,
        Role::Strong => f2 * (1.0 - none_above) + none_above * f1,
    }
    .clamp(0.0, 1.0))
}

/// Sum rate of the one-bit scheme given `k ≥ 2` users.
pub fn onebit_sum_rate_given_users(
    dist: &GainDistribution,
    k: usize,
    rule: ThresholdRule,
    rho: f64,
    access: Access,
) -> Result<f64, QuadratureError> {
    let rates = dist.params().rates;
    let weak = onebit_outage(dist, Role::Weak, k, rule, rho, access)?;
    let strong = onebit_outage(dist, Role::Strong, k, rule, rho, access)?;
    Ok(rates.weak_rate() * (1.0 - weak) + rates.strong_rate() * (1.0 - strong))
}

/// Sum rate averaged over the Poisson user count; a lone user is served by
/// OMA at `single_user_rate` (the weak-user rate when unset).
pub fn onebit_sum_rate(
    dist: &GainDistribution,
    rule: ThresholdRule,
    rho: f64,
    single_user_rate: Option<f64>,
    access: Access,
) -> Result<f64, QuadratureError> {
    let p = dist.params();
    let mu = p.mean_users();
    let lone = single_user_rate.unwrap_or(p.rates.weak_rate());
    let mut total = poisson_pmf(1, mu) * lone * (1.0 - dist.cdf(oma_rate_threshold(lone) / rho)?);
    let k_max = poisson_truncation(mu, POISSON_TRUNCATION_TAIL) as usize;
    for k in 2..=k_max {
        total += poisson_pmf(k as u64, mu) * onebit_sum_rate_given_users(dist, k, rule, rho, access)?;
    }
    Ok(total)
}
