//! Distance-only scheduling: users ordered by distance, gains unknown.

use std::f64::consts::PI;

use super::{one_minus_exp_neg, Access, Role, SectorQuadrature};
use crate::error::QuadratureError;
use crate::geometry::{mean_measure, mean_measure_within, ordered_distance_pdf, ordered_distance_pdf_given};
use crate::mathkit::{fejer_kernel, poisson_cdf_below, poisson_tail};
use crate::noma::{eta_thresholds, oma_rate_threshold};

/// What happens to the strong user when fewer than `i` users are present,
/// so the weak partner of order `i` does not exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingWeakRule {
    /// Nobody is served.
    #[default]
    NoTransmission,
    /// The strong user is still served with its own target.
    ServeStrong,
}

fn scale(quad: &SectorQuadrature, r: f64, offset: f64) -> f64 {
    let p = quad.params();
    (1.0 + r.powf(p.path_loss_exponent)) / fejer_kernel(PI * offset, p.antennas)
}

/// `P(d_k exists and |a_k|² F_M / (1 + d_k^α) ≤ y)`; its limit as `y → ∞`
/// is `P(K ≥ k)`, not one.
pub fn distance_scheme_gain_cdf(quad: &SectorQuadrature, k: u32, y: f64) -> Result<f64, QuadratureError> {
    if y <= 0.0 {
        return Ok(0.0);
    }
    let half = quad.params().half_angle;
    if y.is_infinite() {
        return Ok(poisson_tail(u64::from(k), quad.params().mean_users()));
    }
    let est = quad.average_over_kth_nearest(k, 0.0, half, |r, d| one_minus_exp_neg(y * scale(quad, r, d)))?;
    Ok(est.value.max(0.0))
}

fn no_user_below(quad: &SectorQuadrature, k: u32) -> f64 {
    poisson_cdf_below(u64::from(k), quad.params().mean_users())
}

fn role_eta(quad: &SectorQuadrature, role: Role, rho: f64) -> Option<f64> {
    let p = quad.params();
    let eta = eta_thresholds(&p.split, &p.rates, rho)?;
    Some(match role {
        Role::Weak => eta.weak,
        Role::Strong => eta.strong,
    })
}

/// Outage of the `k`-th nearest user scheduled in `role`: either fewer than
/// `k` users are present, or the user exists and its gain is below `η`.
pub fn distance_scheme_outage(quad: &SectorQuadrature, role: Role, k: u32, rho: f64) -> Result<f64, QuadratureError> {
    let Some(eta) = role_eta(quad, role, rho) else {
        return Ok(1.0);
    };
    let floor = no_user_below(quad, k);
    Ok((floor + distance_scheme_gain_cdf(quad, k, eta)?).min(1.0))
}

/// `P(K < k) + P(K ≥ k)·F_k(η)` with the unnormalized `F_k`, which counts
/// the existence probability twice. Kept for comparison only.
pub fn distance_scheme_outage_unnormalized(
    quad: &SectorQuadrature,
    role: Role,
    k: u32,
    rho: f64,
) -> Result<f64, QuadratureError> {
    let Some(eta) = role_eta(quad, role, rho) else {
        return Ok(1.0);
    };
    let floor = no_user_below(quad, k);
    Ok(floor + (1.0 - floor) * distance_scheme_gain_cdf(quad, k, eta)?)
}

/// Outage given that at least `k` users are present.
pub fn distance_conditional_outage(
    quad: &SectorQuadrature,
    role: Role,
    k: u32,
    rho: f64,
) -> Result<f64, QuadratureError> {
    let Some(eta) = role_eta(quad, role, rho) else {
        return Ok(1.0);
    };
    let exists = poisson_tail(u64::from(k), quad.params().mean_users());
    Ok((distance_scheme_gain_cdf(quad, k, eta)? / exists).min(1.0))
}

/// OMA outage of the `k`-th nearest user with target `rate`.
pub fn distance_oma_outage(quad: &SectorQuadrature, k: u32, rate: f64, rho: f64) -> Result<f64, QuadratureError> {
    let floor = no_user_below(quad, k);
    Ok((floor + distance_scheme_gain_cdf(quad, k, oma_rate_threshold(rate) / rho)?).min(1.0))
}

/// OMA outage of the `k`-th nearest user given that it exists.
pub fn distance_conditional_oma_outage(
    quad: &SectorQuadrature,
    k: u32,
    rate: f64,
    rho: f64,
) -> Result<f64, QuadratureError> {
    let exists = poisson_tail(u64::from(k), quad.params().mean_users());
    Ok((distance_scheme_gain_cdf(quad, k, oma_rate_threshold(rate) / rho)? / exists).min(1.0))
}

/// `∫₀^R (1 + r^α)/M · f_{d_i}(r) dr`.
pub fn q_factor(quad: &SectorQuadrature, i: u32) -> Result<f64, QuadratureError> {
    let p = quad.params();
    let (region, deployment) = (quad.region(), quad.deployment());
    let m = f64::from(p.antennas);
    let est = quad.radial(|r| {
        (1.0 + r.powf(p.path_loss_exponent)) / m * ordered_distance_pdf(i, r, &region, &deployment)
    })?;
    Ok(est.value)
}

/// Small-`y` form `(1 + π²M²Δ²/36)·Q_k·y` of [`distance_scheme_gain_cdf`].
pub fn distance_gain_cdf_approx(quad: &SectorQuadrature, k: u32, y: f64) -> Result<f64, QuadratureError> {
    let p = quad.params();
    let m = f64::from(p.antennas);
    let spread = 1.0 + PI * PI * m * m * p.half_angle * p.half_angle / 36.0;
    Ok(spread * q_factor(quad, k)? * y)
}

/// Probability that the `near`-th nearest user exists, has gain at least
/// `y`, and at least `far` users are present in total.
fn success_with_partner(quad: &SectorQuadrature, near: u32, far: u32, y: f64) -> Result<f64, QuadratureError> {
    let (region, deployment) = (quad.region(), quad.deployment());
    let total = mean_measure(&region, &deployment);
    let need = u64::from(far - near);
    let est = quad.average(
        |r| {
            let beyond = total - mean_measure_within(r, &region, &deployment);
            ordered_distance_pdf(near, r, &region, &deployment) * poisson_tail(need, beyond.max(0.0))
        },
        0.0,
        quad.params().half_angle,
        |r, d| {
            let u = scale(quad, r, d);
            if u.is_infinite() { 0.0 } else { (-y * u).exp() }
        },
    )?;
    Ok(est.value.clamp(0.0, 1.0))
}

/// Sum rate of the pair (`weak` = `i`-th nearest, `strong` = `j`-th
/// nearest, `j < i`).
pub fn distance_sum_rate(
    quad: &SectorQuadrature,
    weak: u32,
    strong: u32,
    rho: f64,
    access: Access,
    rule: MissingWeakRule,
) -> Result<f64, QuadratureError> {
    assert!(strong >= 1 && strong < weak, "need 1 ≤ strong < weak");
    let p = quad.params();
    let mu = p.mean_users();
    let (thr_weak, thr_strong) = match access {
        Access::Noma => match eta_thresholds(&p.split, &p.rates, rho) {
            Some(eta) => (eta.weak, eta.strong),
            None => return Ok(0.0),
        },
        Access::Oma => (
            oma_rate_threshold(p.rates.weak_rate()) / rho,
            oma_rate_threshold(p.rates.strong_rate()) / rho,
        ),
    };
    let weak_success = poisson_tail(u64::from(weak), mu) - distance_scheme_gain_cdf(quad, weak, thr_weak)?;
    let strong_success = match rule {
        MissingWeakRule::ServeStrong => {
            poisson_tail(u64::from(strong), mu) - distance_scheme_gain_cdf(quad, strong, thr_strong)?
        }
        MissingWeakRule::NoTransmission => success_with_partner(quad, strong, weak, thr_strong)?,
    };
    Ok(p.rates.weak_rate() * weak_success.max(0.0) + p.rates.strong_rate() * strong_success.max(0.0))
}

fn pair_thresholds(quad: &SectorQuadrature, rho: f64, access: Access) -> Option<(f64, f64)> {
    let p = quad.params();
    match access {
        Access::Noma => eta_thresholds(&p.split, &p.rates, rho).map(|eta| (eta.weak, eta.strong)),
        Access::Oma => Some((
            oma_rate_threshold(p.rates.weak_rate()) / rho,
            oma_rate_threshold(p.rates.strong_rate()) / rho,
        )),
    }
}

/// Gain CDF of the `k`-th nearest of exactly `users` users.
pub fn distance_gain_cdf_given_users(
    quad: &SectorQuadrature,
    k: u32,
    users: u32,
    y: f64,
) -> Result<f64, QuadratureError> {
    if y <= 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(1.0);
    }
    let (region, deployment) = (quad.region(), quad.deployment());
    let est = quad.average(
        |r| ordered_distance_pdf_given(k, users, r, &region, &deployment),
        0.0,
        quad.params().half_angle,
        |r, d| one_minus_exp_neg(y * scale(quad, r, d)),
    )?;
    Ok(est.value.clamp(0.0, 1.0))
}

/// Outage of the `k`-th nearest of exactly `users ≥ k` users scheduled in
/// `role`.
pub fn distance_outage_given_users(
    quad: &SectorQuadrature,
    role: Role,
    k: u32,
    users: u32,
    rho: f64,
    access: Access,
) -> Result<f64, QuadratureError> {
    let Some((weak, strong)) = pair_thresholds(quad, rho, access) else {
        return Ok(1.0);
    };
    let y = match role {
        Role::Weak => weak,
        Role::Strong => strong,
    };
    distance_gain_cdf_given_users(quad, k, users, y)
}

/// Sum rate of the pair given exactly `users` users; nobody is served when
/// the weak user is missing.
pub fn distance_sum_rate_given_users(
    quad: &SectorQuadrature,
    weak: u32,
    strong: u32,
    users: u32,
    rho: f64,
    access: Access,
) -> Result<f64, QuadratureError> {
    assert!(strong >= 1 && strong < weak, "need 1 ≤ strong < weak");
    if users < weak {
        return Ok(0.0);
    }
    let Some((thr_weak, thr_strong)) = pair_thresholds(quad, rho, access) else {
        return Ok(0.0);
    };
    let rates = quad.params().rates;
    let weak_success = 1.0 - distance_gain_cdf_given_users(quad, weak, users, thr_weak)?;
    let strong_success = 1.0 - distance_gain_cdf_given_users(quad, strong, users, thr_strong)?;
    Ok(rates.weak_rate() * weak_success + rates.strong_rate() * strong_success)
}
