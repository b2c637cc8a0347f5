//! Closed-form and integral performance expressions for the four schemes.
//!
//! Every expression that needs a two-dimensional integral over a sector goes
//! through [`SectorQuadrature`], which nests two adaptive Gauss–Legendre
//! integrators: distance on the outside, direction offset on the inside.

mod distance;
mod gain;
mod multibeam;
mod onebit;
mod perfect;

use std::cell::Cell;

pub use distance::{
    distance_conditional_oma_outage, distance_conditional_outage, distance_gain_cdf_approx, distance_gain_cdf_given_users,
    distance_oma_outage, distance_outage_given_users, distance_sum_rate_given_users,
    distance_scheme_gain_cdf, distance_scheme_outage, distance_scheme_outage_unnormalized,
    distance_sum_rate, q_factor, MissingWeakRule,
};
pub use gain::{
    alternating_sum_outage, order_statistic_cdf, unordered_gain_cdf, GainDistribution,
    OrderStatMethod,
};
pub use multibeam::{
    interference_constants, multibeam_conditional_outage, multibeam_oma_outage, multibeam_outage,
    multibeam_outage_approx, multibeam_outage_given_users, multibeam_sum_rate,
    multibeam_sum_rate_given_users, AsymptoticConstants,
};
pub use onebit::{
    onebit_conditional_cdfs, onebit_outage, onebit_set_pmf, onebit_sum_rate,
    onebit_sum_rate_given_users, ThresholdRule,
};
pub use perfect::{
    asymptotic_conditional_outage, conditional_oma_outage, conditional_outage, noma_sum_rate,
    oma_sum_rate, sum_rate_given_users, SumRateOptions,
};

use crate::error::QuadratureError;
use crate::geometry::{ordered_distance_pdf, DeploymentParams, SectorRegion};
use crate::params::SystemParams;
use crate::quadrature::{Estimate, Integrator, QuadratureConfig};

/// Poisson upper-tail mass below which infinite sums over `K` are truncated.
pub const POISSON_TRUNCATION_TAIL: f64 = 1e-10;

/// The scheduled user in a NOMA pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Weak,
    Strong,
}

/// Multiple-access mode being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Access {
    Noma,
    /// Orthogonal access, each user at twice its target rate.
    Oma,
}

/// Averaging over a sector: `∫₀^R w(r) · mean_{δ ∈ [lo, hi]} g(r, δ) dr`,
/// where `δ` is the user's direction offset from the beam.
#[derive(Debug, Clone)]
pub struct SectorQuadrature {
    params: SystemParams,
    integrator: Integrator,
}

impl SectorQuadrature {
    pub fn new(params: SystemParams) -> Self {
        Self::with_config(params, QuadratureConfig::default())
    }

    pub fn with_config(params: SystemParams, config: QuadratureConfig) -> Self {
        Self { params, integrator: Integrator::new(config) }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn config(&self) -> QuadratureConfig {
        self.integrator.config()
    }

    pub fn region(&self) -> SectorRegion {
        self.params.region()
    }

    pub fn deployment(&self) -> DeploymentParams {
        self.params.deployment()
    }

    /// Offsets in `[0, Δ]` where the own-beam kernel vanishes (`δ = 2k/M`),
    /// used as panel edges.
    fn angular_breaks(&self, lo: f64, hi: f64) -> Vec<f64> {
        let m = f64::from(self.params.antennas);
        let mut points = vec![lo];
        let first = (lo * m / 2.0).floor() as i64 + 1;
        let mut k = first;
        loop {
            let null = 2.0 * k as f64 / m;
            if null >= hi {
                break;
            }
            if null > lo && k != 0 {
                points.push(null);
            }
            k += 1;
        }
        points.push(hi);
        points
    }

    /// `∫₀^R f(r) dr`.
    pub fn radial<F: Fn(f64) -> f64>(&self, f: F) -> Result<Estimate, QuadratureError> {
        self.integrator.integrate(f, 0.0, self.params.radius)
    }

    /// `∫₀^R w(r) · (1/(hi − lo)) ∫_lo^hi g(r, δ) dδ dr`.
    pub fn average<W, G>(&self, radial_weight: W, lo: f64, hi: f64, integrand: G) -> Result<Estimate, QuadratureError>
    where
        W: Fn(f64) -> f64,
        G: Fn(f64, f64) -> f64,
    {
        self.average_with_breaks(radial_weight, lo, hi, &[], integrand)
    }

    /// [`average`](Self::average) with extra panel edges in `δ`, for
    /// integrands with known kinks or jumps.
    pub fn average_with_breaks<W, G>(
        &self,
        radial_weight: W,
        lo: f64,
        hi: f64,
        extra: &[f64],
        integrand: G,
    ) -> Result<Estimate, QuadratureError>
    where
        W: Fn(f64) -> f64,
        G: Fn(f64, f64) -> f64,
    {
        let mut breaks = self.angular_breaks(lo, hi);
        breaks.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let width = hi - lo;
        let inner_failure: Cell<Option<QuadratureError>> = Cell::new(None);
        let outer = |r: f64| -> f64 {
            let w = radial_weight(r);
            if w == 0.0 {
                return 0.0;
            }
            match self.integrator.integrate_with_breaks(|d| integrand(r, d), &breaks) {
                Ok(est) => w * est.value / width,
                Err(e) => {
                    if inner_failure.get().is_none() {
                        inner_failure.set(Some(e));
                    }
                    f64::NAN
                }
            }
        };
        let est = self.integrator.integrate(outer, 0.0, self.params.radius)?;
        if let Some(e) = inner_failure.get() {
            return Err(e);
        }
        Ok(est)
    }

    /// Average over users of the sector with the thinned location law.
    pub fn average_over_users<G>(&self, integrand: G) -> Result<Estimate, QuadratureError>
    where
        G: Fn(f64, f64) -> f64,
    {
        let region = self.region();
        let deployment = self.deployment();
        self.average(
            |r| crate::geometry::radial_density(r, &region, &deployment),
            0.0,
            self.params.half_angle,
            integrand,
        )
    }

    /// Average against the (unnormalized) density of the `k`-th nearest
    /// distance; total weight is `P(K ≥ k)`.
    pub fn average_over_kth_nearest<G>(&self, k: u32, lo: f64, hi: f64, integrand: G) -> Result<Estimate, QuadratureError>
    where
        G: Fn(f64, f64) -> f64,
    {
        let region = self.region();
        let deployment = self.deployment();
        self.average(|r| ordered_distance_pdf(k, r, &region, &deployment), lo, hi, integrand)
    }
}

/// `1 − e^{−x}` without cancellation for small `x`; `1` when `x = ∞`.
pub(crate) fn one_minus_exp_neg(x: f64) -> f64 {
    if x.is_infinite() {
        1.0
    } else {
        -(-x).exp_m1()
    }
}
