use std::f64::consts::PI;

use statrs::function::beta::checked_beta_reg;

use super::{one_minus_exp_neg, SectorQuadrature};
use crate::error::QuadratureError;
use crate::mathkit::{binomial, fejer_kernel, lower_incomplete_gamma};
use crate::params::SystemParams;
use crate::quadrature::{Estimate, QuadratureConfig};

/// How the CDF of an order statistic is evaluated from the unordered CDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderStatMethod {
    /// `Σ_{n≥j} C(K,n) F^n (1−F)^{K−n}`.
    #[default]
    Binomial,
    /// Regularized incomplete beta `I_F(j, K − j + 1)`.
    IncompleteBeta,
    /// `c_j Σ_p C(K−j,p) (−1)^p F^{j+p}/(j+p)`; loses precision for large
    /// `K` and is kept as a cross-check.
    AlternatingSum,
}

/// `P(X_(j) ≤ x)` for the `j`-th smallest of `k` i.i.d. draws whose common
/// CDF at `x` is `f`.
pub fn order_statistic_cdf(index: usize, k: usize, f: f64, method: OrderStatMethod) -> f64 {
    assert!(index >= 1 && index <= k, "order {index} out of range for {k} users");
    let f = f.clamp(0.0, 1.0);
    match method {
        OrderStatMethod::Binomial => {
            let q = 1.0 - f;
            (index..=k)
                .map(|n| binomial(k as u64, n as u64) * f.powi(n as i32) * q.powi((k - n) as i32))
                .sum::<f64>()
                .min(1.0)
        }
        OrderStatMethod::IncompleteBeta => {
            checked_beta_reg(index as f64, (k - index + 1) as f64, f).expect("valid beta arguments")
        }
        OrderStatMethod::AlternatingSum => alternating_sum_outage(index, k, f),
    }
}

/// The alternating-sum form of the order-statistic CDF.
pub fn alternating_sum_outage(index: usize, k: usize, f: f64) -> f64 {
    let c = k as f64 * binomial((k - 1) as u64, (index - 1) as u64);
    let span = k - index;
    let sum: f64 = (0..=span)
        .map(|p| {
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(span as u64, p as u64) * f.powi((index + p) as i32) / (index + p) as f64
        })
        .sum();
    c * sum
}

/// CDF of the unordered effective gain `|a|² F_M(π(θ̄−θ)) / (1 + d^α)` of a
/// user placed uniformly (under the thinned law) in the scheduled sector.
#[derive(Debug, Clone)]
pub struct GainDistribution {
    quad: SectorQuadrature,
}

impl GainDistribution {
    pub fn new(params: SystemParams) -> Self {
        Self { quad: SectorQuadrature::new(params) }
    }

    pub fn with_config(params: SystemParams, config: QuadratureConfig) -> Self {
        Self { quad: SectorQuadrature::with_config(params, config) }
    }

    pub fn quadrature(&self) -> &SectorQuadrature {
        &self.quad
    }

    pub fn params(&self) -> &SystemParams {
        self.quad.params()
    }

    /// `u = (1 + r^α)/F_M(πδ)`: the gain threshold scale at a location.
    fn scale(&self, r: f64, offset: f64) -> f64 {
        let p = self.params();
        (1.0 + r.powf(p.path_loss_exponent)) / fejer_kernel(PI * offset, p.antennas)
    }

    pub fn cdf_estimate(&self, y: f64) -> Result<Estimate, QuadratureError> {
        if y <= 0.0 {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        if y.is_infinite() {
            return Ok(Estimate { value: 1.0, error: 0.0 });
        }
        self.quad.average_over_users(|r, d| one_minus_exp_neg(y * self.scale(r, d)))
    }

    /// `F(y)`.
    pub fn cdf(&self, y: f64) -> Result<f64, QuadratureError> {
        Ok(self.cdf_estimate(y)?.value.clamp(0.0, 1.0))
    }

    /// `1 − F(y)`, accurate when `F(y)` is close to one.
    pub fn survival(&self, y: f64) -> Result<f64, QuadratureError> {
        if y <= 0.0 {
            return Ok(1.0);
        }
        if y.is_infinite() {
            return Ok(0.0);
        }
        let est = self.quad.average_over_users(|r, d| {
            let u = self.scale(r, d);
            if u.is_infinite() { 0.0 } else { (-y * u).exp() }
        })?;
        Ok(est.value.clamp(0.0, 1.0))
    }

    /// `F(hi) − F(lo)` without subtracting two nearly equal numbers.
    pub fn cdf_difference(&self, lo: f64, hi: f64) -> Result<f64, QuadratureError> {
        if hi <= lo {
            return Ok(0.0);
        }
        let lo = lo.max(0.0);
        if hi.is_infinite() {
            return self.survival(lo);
        }
        let est = self.quad.average_over_users(|r, d| {
            let u = self.scale(r, d);
            if u.is_infinite() {
                return if lo == 0.0 { 1.0 } else { 0.0 };
            }
            (-lo * u).exp() * one_minus_exp_neg((hi - lo) * u)
        })?;
        Ok(est.value.clamp(0.0, 1.0))
    }

    /// `P(X_(j) ≤ y)` among `k` users.
    pub fn ordered_cdf(&self, index: usize, k: usize, y: f64, method: OrderStatMethod) -> Result<f64, QuadratureError> {
        Ok(order_statistic_cdf(index, k, self.cdf(y)?, method))
    }

    /// Slope `c` of the small-gain approximation `F(y) ≈ c·y`, with the array
    /// gain expanded to second order in the direction offset.
    pub fn small_gain_slope(&self) -> f64 {
        let p = self.params();
        let m = f64::from(p.antennas);
        let t = p.radius * p.blockage;
        let alpha = p.path_loss_exponent;
        let g2 = lower_incomplete_gamma(2.0, t);
        let radial = g2 + p.blockage.powf(-alpha) * lower_incomplete_gamma(alpha + 2.0, t);
        (2.0 + PI * PI * m * m * p.half_angle * p.half_angle / 18.0) * radial / (2.0 * m * g2)
    }

    /// `F'(0) = E[(1 + d^α)/F_M]`, by quadrature.
    pub fn small_gain_slope_exact(&self) -> Result<f64, QuadratureError> {
        Ok(self.quad.average_over_users(|r, d| self.scale(r, d))?.value)
    }
}

/// `F(y)` for the sector described by `params`.
pub fn unordered_gain_cdf(y: f64, params: &SystemParams) -> Result<f64, QuadratureError> {
    GainDistribution::new(*params).cdf(y)
}
