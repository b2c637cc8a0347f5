//! Perfect-CSI scheduling: users ordered by effective gain.

use super::gain::{order_statistic_cdf, GainDistribution, OrderStatMethod};
use super::{Access, Role, POISSON_TRUNCATION_TAIL};
use crate::error::QuadratureError;
use crate::mathkit::{binomial, poisson_pmf, poisson_truncation};
use crate::noma::{eta_thresholds, oma_rate_threshold};
use crate::params::{resolve_gain_pair, PairFallback, UserOrder};

/// Knobs shared by the Poisson-averaged sum rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SumRateOptions {
    pub fallback: PairFallback,
    /// Rate of a lone user (`K = 1`), served by OMA; the weak-user rate when
    /// unset.
    pub single_user_rate: Option<f64>,
    pub method: OrderStatMethod,
}

fn role_threshold(dist: &GainDistribution, role: Role, rho: f64) -> Option<f64> {
    let p = dist.params();
    let eta = eta_thresholds(&p.split, &p.rates, rho)?;
    Some(match role {
        Role::Weak => eta.weak,
        Role::Strong => eta.strong,
    })
}

/// Outage of the user at gain order `index` among `k`, scheduled in `role`;
/// `1` when the power split cannot support the weak user's rate.
pub fn conditional_outage(
    dist: &GainDistribution,
    role: Role,
    index: usize,
    k: usize,
    rho: f64,
) -> Result<f64, QuadratureError> {
    match role_threshold(dist, role, rho) {
        None => Ok(1.0),
        Some(eta) => dist.ordered_cdf(index, k, eta, OrderStatMethod::Binomial),
    }
}

/// OMA outage of the user at gain order `index` among `k` with target `rate`.
pub fn conditional_oma_outage(
    dist: &GainDistribution,
    index: usize,
    k: usize,
    rate: f64,
    rho: f64,
) -> Result<f64, QuadratureError> {
    dist.ordered_cdf(index, k, oma_rate_threshold(rate) / rho, OrderStatMethod::Binomial)
}

/// Leading high-SNR term `c_j (c·η)^j / j`, with `c` the small-gain slope
/// of the unordered CDF. Valid for narrow sectors and large `ρ`.
pub fn asymptotic_conditional_outage(dist: &GainDistribution, index: usize, k: usize, eta: f64) -> f64 {
    assert!(index >= 1 && index <= k, "order {index} out of range for {k} users");
    let c = k as f64 * binomial((k - 1) as u64, (index - 1) as u64);
    let f = dist.small_gain_slope() * eta;
    c * f.powi(index as i32) / index as f64
}

fn lone_user_rate(dist: &GainDistribution, opts: &SumRateOptions, rho: f64) -> Result<f64, QuadratureError> {
    let rate = opts.single_user_rate.unwrap_or(dist.params().rates.weak_rate());
    let outage = dist.cdf(oma_rate_threshold(rate) / rho)?;
    Ok(rate * (1.0 - outage))
}

/// Unordered CDF at the weak and strong gain thresholds, or `None` when
/// NOMA is infeasible.
fn threshold_cdfs(dist: &GainDistribution, rho: f64, access: Access) -> Result<Option<(f64, f64)>, QuadratureError> {
    let p = dist.params();
    let (weak, strong) = match access {
        Access::Noma => match eta_thresholds(&p.split, &p.rates, rho) {
            Some(eta) => (eta.weak, eta.strong),
            None => return Ok(None),
        },
        Access::Oma => (
            oma_rate_threshold(p.rates.weak_rate()) / rho,
            oma_rate_threshold(p.rates.strong_rate()) / rho,
        ),
    };
    Ok(Some((dist.cdf(weak)?, dist.cdf(strong)?)))
}

fn pair_rate(
    dist: &GainDistribution,
    weak: UserOrder,
    strong: UserOrder,
    k: usize,
    cdfs: Option<(f64, f64)>,
    opts: &SumRateOptions,
) -> f64 {
    let (Some((i, j)), Some((f_weak, f_strong))) = (resolve_gain_pair(weak, strong, k, opts.fallback), cdfs) else {
        return 0.0;
    };
    let rates = dist.params().rates;
    rates.weak_rate() * (1.0 - order_statistic_cdf(i, k, f_weak, opts.method))
        + rates.strong_rate() * (1.0 - order_statistic_cdf(j, k, f_strong, opts.method))
}

/// Sum rate given exactly `k` users: nothing for `k = 0`, the lone-user OMA
/// rate for `k = 1`, the pair's rate otherwise.
pub fn sum_rate_given_users(
    dist: &GainDistribution,
    weak: UserOrder,
    strong: UserOrder,
    k: usize,
    rho: f64,
    opts: SumRateOptions,
    access: Access,
) -> Result<f64, QuadratureError> {
    match k {
        0 => Ok(0.0),
        1 => lone_user_rate(dist, &opts, rho),
        _ => Ok(pair_rate(dist, weak, strong, k, threshold_cdfs(dist, rho, access)?, &opts)),
    }
}

fn poisson_sum_rate(
    dist: &GainDistribution,
    weak: UserOrder,
    strong: UserOrder,
    rho: f64,
    opts: SumRateOptions,
    access: Access,
) -> Result<f64, QuadratureError> {
    let mu = dist.params().mean_users();
    let k_max = poisson_truncation(mu, POISSON_TRUNCATION_TAIL) as usize;
    let mut total = poisson_pmf(1, mu) * lone_user_rate(dist, &opts, rho)?;
    let cdfs = threshold_cdfs(dist, rho, access)?;
    for k in 2..=k_max {
        total += poisson_pmf(k as u64, mu) * pair_rate(dist, weak, strong, k, cdfs, &opts);
    }
    Ok(total)
}

/// Average outage sum rate of the NOMA pair `(weak, strong)` over the
/// Poisson user count, truncated once the upper tail drops below `1e−10`.
pub fn noma_sum_rate(
    dist: &GainDistribution,
    weak: UserOrder,
    strong: UserOrder,
    rho: f64,
    opts: SumRateOptions,
) -> Result<f64, QuadratureError> {
    poisson_sum_rate(dist, weak, strong, rho, opts, Access::Noma)
}

/// OMA counterpart of [`noma_sum_rate`]: both users served in orthogonal
/// halves, each needing twice its rate.
pub fn oma_sum_rate(
    dist: &GainDistribution,
    weak: UserOrder,
    strong: UserOrder,
    rho: f64,
    opts: SumRateOptions,
) -> Result<f64, QuadratureError> {
    poisson_sum_rate(dist, weak, strong, rho, opts, Access::Oma)
}
