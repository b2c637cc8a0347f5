//! `N` simultaneous orthogonal beams, one distance-ordered NOMA pair each.
//!
//! A user at offset `δ` from its own beam sees array gain `F_M(πδ)` on that
//! beam and `Σ_{n=1}^{N−1} F_M(π(2n/N − δ))` on the others. All beams are
//! statistically identical, so every result is computed for one beam.

use std::f64::consts::PI;

use super::distance::MissingWeakRule;
use super::{Access, Role, SectorQuadrature};
use crate::error::{AnalyticError, QuadratureError};
use crate::geometry::{mean_measure, mean_measure_within, ordered_distance_pdf, ordered_distance_pdf_given};
use crate::mathkit::{fejer_kernel, fejer_kernel_derivative, poisson_tail};
use crate::noma::oma_rate_threshold;

use super::distance::q_factor;

/// Constants of the high-SNR multi-beam expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticConstants {
    /// Slope of the small-gain approximation of the unordered CDF.
    pub c2_single: f64,
    /// `Q_i` for `i = 1, 2, ...` (index 0 holds `Q_1`).
    pub q: Vec<f64>,
    /// `Σ_{n≥2} F_M(−2(n−1)π/N)`.
    pub c2: f64,
    /// `Σ_{n≥2} F_M'(−2(n−1)π/N)`.
    pub c3: f64,
    /// `β₁² − ε₁β₂²`.
    pub c4: f64,
}

impl AsymptoticConstants {
    /// Constants for `beams` beams, with `Q_i` up to order `max_order`.
    pub fn new(quad: &SectorQuadrature, beams: usize, max_order: u32) -> Result<Self, QuadratureError> {
        let p = quad.params();
        let (c2, c3) = interference_constants(p.antennas, beams);
        let q = (1..=max_order).map(|i| q_factor(quad, i)).collect::<Result<Vec<_>, _>>()?;
        let dist = super::GainDistribution::with_config(*p, quad.config());
        Ok(Self {
            c2_single: dist.small_gain_slope(),
            q,
            c2,
            c3,
            c4: p.split.weak_share() - p.rates.weak_threshold() * p.split.strong_share(),
        })
    }
}

/// `(c₂, c₃)`: interference kernel values and slopes at the other beams.
pub fn interference_constants(antennas: u32, beams: usize) -> (f64, f64) {
    let mut c2 = 0.0;
    let mut c3 = 0.0;
    for n in 1..beams {
        let x = -2.0 * n as f64 * PI / beams as f64;
        c2 += fejer_kernel(x, antennas);
        c3 += fejer_kernel_derivative(x, antennas).expect("beam offsets avoid multiples of 2π");
    }
    (c2, c3)
}

/// One SINR condition `own·F − cross·I > 0` and `|a|² ≥ ε(1+r^α)/(ρ(own·F − cross·I))`.
#[derive(Debug, Clone, Copy)]
struct Requirement {
    threshold: f64,
    own: f64,
    cross: f64,
}

fn requirements(quad: &SectorQuadrature, role: Role, access: Access) -> Vec<Requirement> {
    let p = quad.params();
    let b1 = p.split.weak_share();
    let b2 = p.split.strong_share();
    let e1 = p.rates.weak_threshold();
    let e2 = p.rates.strong_threshold();
    let decode_weak = Requirement { threshold: e1, own: b1 - e1 * b2, cross: e1 };
    match (access, role) {
        (Access::Noma, Role::Weak) => vec![decode_weak],
        (Access::Noma, Role::Strong) => vec![decode_weak, Requirement { threshold: e2, own: b2, cross: e2 }],
        (Access::Oma, role) => {
            let rate = match role {
                Role::Weak => p.rates.weak_rate(),
                Role::Strong => p.rates.strong_rate(),
            };
            let e = oma_rate_threshold(rate);
            vec![Requirement { threshold: e, own: 1.0, cross: e }]
        }
    }
}

fn interference(offset: f64, antennas: u32, beams: usize) -> f64 {
    (1..beams)
        .map(|n| fejer_kernel(PI * (2.0 * n as f64 / beams as f64 - offset), antennas))
        .sum()
}

/// `∬ exp(−max_t) · w(r) / 2Δ` over the sector, with `w` the supplied radial
/// weight.
fn success_integral<W: Fn(f64) -> f64>(
    quad: &SectorQuadrature,
    weight: W,
    beams: usize,
    reqs: &[Requirement],
    rho: f64,
) -> Result<f64, QuadratureError> {
    let p = quad.params();
    let (m, alpha) = (p.antennas, p.path_loss_exponent);
    let half = p.half_angle;
    let edges: Vec<f64> = reqs.iter().flat_map(|req| feasibility_edges(req, m, beams, -half, half)).collect();
    let est = quad.average_with_breaks(weight, -half, half, &edges, |r, d| {
        let own = fejer_kernel(PI * d, m);
        let cross = interference(d, m, beams);
        let loss = 1.0 + r.powf(alpha);
        let mut worst: f64 = 0.0;
        for req in reqs {
            let margin = req.own * own - req.cross * cross;
            if margin <= 0.0 {
                return 0.0;
            }
            worst = worst.max(req.threshold * loss / (rho * margin));
        }
        (-worst).exp()
    })?;
    Ok(est.value.clamp(0.0, 1.0))
}

/// Offsets in `(lo, hi)` where `own·F − cross·I` changes sign. The margin
/// does not depend on distance, and at high SNR the success probability
/// drops to zero sharply there.
fn feasibility_edges(req: &Requirement, antennas: u32, beams: usize, lo: f64, hi: f64) -> Vec<f64> {
    const SCAN: usize = 256;
    let margin = |d: f64| req.own * fejer_kernel(PI * d, antennas) - req.cross * interference(d, antennas, beams);
    let mut edges = Vec::new();
    let step = (hi - lo) / SCAN as f64;
    let mut a = lo;
    let mut fa = margin(a);
    for n in 1..=SCAN {
        let b = if n == SCAN { hi } else { lo + n as f64 * step };
        let fb = margin(b);
        if (fa > 0.0) != (fb > 0.0) {
            let (mut x0, mut x1) = (a, b);
            for _ in 0..100 {
                let mid = 0.5 * (x0 + x1);
                if mid <= x0 || mid >= x1 {
                    break;
                }
                if (margin(mid) > 0.0) == (fa > 0.0) {
                    x0 = mid;
                } else {
                    x1 = mid;
                }
            }
            edges.push(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    edges
}

fn kth_success(quad: &SectorQuadrature, k: u32, beams: usize, reqs: &[Requirement], rho: f64) -> Result<f64, QuadratureError> {
    let (region, deployment) = (quad.region(), quad.deployment());
    success_integral(quad, |r| ordered_distance_pdf(k, r, &region, &deployment), beams, reqs, rho)
}

/// Outage of the `k`-th nearest user of a beam, scheduled as `role` in a
/// NOMA pair. Includes the event that fewer than `k` users are present.
pub fn multibeam_outage(quad: &SectorQuadrature, role: Role, k: u32, beams: usize, rho: f64) -> Result<f64, QuadratureError> {
    let reqs = requirements(quad, role, Access::Noma);
    Ok(1.0 - kth_success(quad, k, beams, &reqs, rho)?)
}

/// OMA outage of the `k`-th nearest user of a beam whose target is the
/// `role` user's rate.
pub fn multibeam_oma_outage(quad: &SectorQuadrature, role: Role, k: u32, beams: usize, rho: f64) -> Result<f64, QuadratureError> {
    let reqs = requirements(quad, role, Access::Oma);
    Ok(1.0 - kth_success(quad, k, beams, &reqs, rho)?)
}

/// Outage given that the `k`-th nearest user exists.
pub fn multibeam_conditional_outage(
    quad: &SectorQuadrature,
    role: Role,
    k: u32,
    beams: usize,
    rho: f64,
    access: Access,
) -> Result<f64, QuadratureError> {
    let reqs = requirements(quad, role, access);
    let exists = poisson_tail(u64::from(k), quad.params().mean_users());
    Ok((1.0 - kth_success(quad, k, beams, &reqs, rho)? / exists).clamp(0.0, 1.0))
}

/// High-SNR outage of the weak user of order `i`, excluding the
/// `P(K < i)` floor: `M Q_i ε₁ / (ρ(M c₄ − c₂ ε₁))`.
pub fn multibeam_outage_approx(
    quad: &SectorQuadrature,
    i: u32,
    rho: f64,
    constants: &AsymptoticConstants,
) -> Result<f64, AnalyticError> {
    let p = quad.params();
    let m = f64::from(p.antennas);
    let e1 = p.rates.weak_threshold();
    let denom = m * constants.c4 - constants.c2 * e1;
    if !(denom > 0.0) {
        return Err(AnalyticError::Infeasible(format!("M·c4 − c2·ε1 = {denom} is not positive")));
    }
    let q = match constants.q.get(i as usize - 1) {
        Some(&q) => q,
        None => q_factor(quad, i)?,
    };
    Ok(m * q * e1 / (rho * denom))
}

/// Total sum rate over all `beams` beams, each serving its `weak`-th and
/// `strong`-th nearest users.
pub fn multibeam_sum_rate(
    quad: &SectorQuadrature,
    weak: u32,
    strong: u32,
    beams: usize,
    rho: f64,
    access: Access,
    rule: MissingWeakRule,
) -> Result<f64, QuadratureError> {
    assert!(strong >= 1 && strong < weak, "need 1 ≤ strong < weak");
    let p = quad.params();
    let weak_success = kth_success(quad, weak, beams, &requirements(quad, Role::Weak, access), rho)?;
    let strong_reqs = requirements(quad, Role::Strong, access);
    let strong_success = match rule {
        MissingWeakRule::ServeStrong => kth_success(quad, strong, beams, &strong_reqs, rho)?,
        MissingWeakRule::NoTransmission => {
            let (region, deployment) = (quad.region(), quad.deployment());
            let total = mean_measure(&region, &deployment);
            let need = u64::from(weak - strong);
            success_integral(
                quad,
                |r| {
                    let beyond = (total - mean_measure_within(r, &region, &deployment)).max(0.0);
                    ordered_distance_pdf(strong, r, &region, &deployment) * poisson_tail(need, beyond)
                },
                beams,
                &strong_reqs,
                rho,
            )?
        }
    };
    let per_beam = p.rates.weak_rate() * weak_success + p.rates.strong_rate() * strong_success;
    Ok(beams as f64 * per_beam)
}

fn kth_success_given_users(
    quad: &SectorQuadrature,
    k: u32,
    users: u32,
    beams: usize,
    reqs: &[Requirement],
    rho: f64,
) -> Result<f64, QuadratureError> {
    let (region, deployment) = (quad.region(), quad.deployment());
    success_integral(quad, |r| ordered_distance_pdf_given(k, users, r, &region, &deployment), beams, reqs, rho)
}

/// Outage of the `k`-th nearest of exactly `users ≥ k` users in a beam.
pub fn multibeam_outage_given_users(
    quad: &SectorQuadrature,
    role: Role,
    k: u32,
    users: u32,
    beams: usize,
    rho: f64,
    access: Access,
) -> Result<f64, QuadratureError> {
    let reqs = requirements(quad, role, access);
    Ok(1.0 - kth_success_given_users(quad, k, users, beams, &reqs, rho)?)
}

/// Total sum rate over all beams when every beam holds exactly `users`
/// users; a beam without its weak user stays silent.
pub fn multibeam_sum_rate_given_users(
    quad: &SectorQuadrature,
    weak: u32,
    strong: u32,
    users: u32,
    beams: usize,
    rho: f64,
    access: Access,
) -> Result<f64, QuadratureError> {
    assert!(strong >= 1 && strong < weak, "need 1 ≤ strong < weak");
    if users < weak {
        return Ok(0.0);
    }
    let p = quad.params();
    let weak_success = kth_success_given_users(quad, weak, users, beams, &requirements(quad, Role::Weak, access), rho)?;
    let strong_success =
        kth_success_given_users(quad, strong, users, beams, &requirements(quad, Role::Strong, access), rho)?;
    Ok(beams as f64 * (p.rates.weak_rate() * weak_success + p.rates.strong_rate() * strong_success))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::distance::{distance_scheme_outage, distance_sum_rate};
    use crate::mathkit::poisson_cdf_below;
    use crate::params::SystemParams;
    use approx::assert_abs_diff_eq;

    fn existence_floor(quad: &SectorQuadrature, k: u32) -> f64 {
        poisson_cdf_below(u64::from(k), quad.params().mean_users())
    }

    fn fig6() -> SectorQuadrature {
        let params = SystemParams { antennas: 8, density: 10.0, half_angle: 0.01, ..SystemParams::reference() }
            .with_rates(0.5, 5.0);
        SectorQuadrature::new(params)
    }

    #[test]
    fn constants_vanish_when_beams_divide_antennas() {
        let (c2, c3) = interference_constants(8, 4);
        assert_abs_diff_eq!(c2, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c3, 0.0, epsilon = 1e-9);
        let (c2, _) = interference_constants(8, 3);
        assert!(c2 > 0.0);
    }

    #[test]
    fn single_beam_reduces_to_distance_scheme() {
        let q = SectorQuadrature::new(SystemParams::reference());
        for power in [10.0, 30.0] {
            let rho = q.params().rho(power);
            for (role, k) in [(Role::Weak, 3), (Role::Strong, 1)] {
                let mb = multibeam_outage(&q, role, k, 1, rho).unwrap();
                let ds = distance_scheme_outage(&q, role, k, rho).unwrap();
                assert_abs_diff_eq!(mb, ds, epsilon = 1e-8);
            }
            for rule in [MissingWeakRule::ServeStrong, MissingWeakRule::NoTransmission] {
                let mb = multibeam_sum_rate(&q, 3, 1, 1, rho, Access::Noma, rule).unwrap();
                let ds = distance_sum_rate(&q, 3, 1, rho, Access::Noma, rule).unwrap();
                assert_abs_diff_eq!(mb, ds, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn approximation_tracks_exact_at_40_dbm() {
        let q = fig6();
        let rho = q.params().rho(40.0);
        let constants = AsymptoticConstants::new(&q, 4, 3).unwrap();
        let exact = multibeam_outage(&q, Role::Weak, 3, 4, rho).unwrap() - existence_floor(&q, 3);
        let approx = multibeam_outage_approx(&q, 3, rho, &constants).unwrap();
        assert!((approx / exact - 1.0).abs() < 0.15, "{approx} vs {exact}");
    }

    #[test]
    fn oma_strong_user_floors_while_noma_improves() {
        let q = fig6();
        let at = |p: f64, access: Access| {
            multibeam_conditional_outage(&q, Role::Strong, 1, 4, q.params().rho(p), access).unwrap()
        };
        assert!(at(40.0, Access::Noma) < at(20.0, Access::Noma));
        assert!(at(40.0, Access::Oma) > 0.05);
    }

    #[test]
    fn given_users_single_beam_matches_distance_scheme() {
        use crate::analytic::distance::{distance_outage_given_users, distance_sum_rate_given_users};
        let q = SectorQuadrature::new(SystemParams::reference());
        let rho = q.params().rho(25.0);
        for access in [Access::Noma, Access::Oma] {
            let mb = multibeam_outage_given_users(&q, Role::Strong, 1, 5, 1, rho, access).unwrap();
            let ds = distance_outage_given_users(&q, Role::Strong, 1, 5, rho, access).unwrap();
            assert_abs_diff_eq!(mb, ds, epsilon = 1e-8);
            let mb = multibeam_sum_rate_given_users(&q, 4, 1, 5, 1, rho, access).unwrap();
            let ds = distance_sum_rate_given_users(&q, 4, 1, 5, rho, access).unwrap();
            assert_abs_diff_eq!(mb, ds, epsilon = 1e-8);
        }
    }
}
