//! Blockage-thinned Poisson deployments in wedge-shaped sectors.
//!
//! Users form a homogeneous PPP of density `λ`; each keeps a line-of-sight
//! path with probability `e^{−φ r}`, so the scheduled users are an
//! inhomogeneous PPP with intensity `λ e^{−φ r}`. Directions are normalized
//! (`θ ∈ [−1, 1)`, wrapping modulo 2) and the sector spans `θ̄ ± Δ`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::ParamError;
use crate::mathkit::{lower_incomplete_gamma, poisson_pmf, wrap_direction};

/// Wedge of half-width `half_angle` around `beam_direction`, radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorRegion {
    pub beam_direction: f64,
    pub half_angle: f64,
    pub radius: f64,
}

impl SectorRegion {
    pub fn new(beam_direction: f64, half_angle: f64, radius: f64) -> Result<Self, ParamError> {
        if !(half_angle > 0.0 && half_angle <= 1.0) {
            return Err(ParamError::new("half_angle", format!("must lie in (0, 1], got {half_angle}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(ParamError::new("radius", format!("must be positive, got {radius}")));
        }
        if !beam_direction.is_finite() {
            return Err(ParamError::new("beam_direction", "must be finite"));
        }
        Ok(Self { beam_direction: wrap_direction(beam_direction), half_angle, radius })
    }

    /// Same sector pointed in another direction.
    pub fn steered(&self, beam_direction: f64) -> Self {
        Self { beam_direction: wrap_direction(beam_direction), ..*self }
    }

    pub fn contains(&self, loc: &UserLocation) -> bool {
        let offset = wrap_direction(loc.direction - self.beam_direction).abs();
        loc.distance >= 0.0
            && loc.distance <= self.radius
            && offset <= self.half_angle * (1.0 + 1e-12)
    }
}

/// User density `λ` and blockage parameter `φ` (per meter).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeploymentParams {
    pub density: f64,
    pub blockage: f64,
}

impl DeploymentParams {
    pub fn new(density: f64, blockage: f64) -> Result<Self, ParamError> {
        if !(density > 0.0 && density.is_finite()) {
            return Err(ParamError::new("density", format!("must be positive, got {density}")));
        }
        if !(blockage > 0.0 && blockage.is_finite()) {
            return Err(ParamError::new(
                "blockage",
                format!("must be positive (φ = 0 is not supported), got {blockage}"),
            ));
        }
        Ok(Self { density, blockage })
    }
}

/// Polar position of one user: distance in meters and normalized direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLocation {
    pub distance: f64,
    pub direction: f64,
}

/// Mean number of LOS users within distance `r` of the base station inside
/// the sector: `2Δλφ^{−2}γ(2, rφ)`.
pub fn mean_measure_within(r: f64, region: &SectorRegion, params: &DeploymentParams) -> f64 {
    let phi = params.blockage;
    2.0 * region.half_angle * params.density / (phi * phi) * lower_incomplete_gamma(2.0, r * phi)
}

/// Mean number of LOS users in the whole sector.
pub fn mean_measure(region: &SectorRegion, params: &DeploymentParams) -> f64 {
    mean_measure_within(region.radius, region, params)
}

/// `P(K = k)` for the sector's user count.
pub fn user_count_pmf(k: u64, region: &SectorRegion, params: &DeploymentParams) -> f64 {
    poisson_pmf(k, mean_measure(region, params))
}

/// Radial density of one user given it lies in the sector:
/// `φ² r e^{−φ r} / γ(2, R φ)` on `[0, R]`.
pub fn radial_density(r: f64, region: &SectorRegion, params: &DeploymentParams) -> f64 {
    if !(0.0..=region.radius).contains(&r) {
        return 0.0;
    }
    let phi = params.blockage;
    phi * phi * r * (-phi * r).exp() / lower_incomplete_gamma(2.0, region.radius * phi)
}

/// Inverse of the radial CDF `γ(2, rφ) / γ(2, Rφ)`.
///
/// Newton steps on `t = rφ`, falling back to bisection whenever a step leaves
/// the current bracket.
pub fn radial_quantile(u: f64, region: &SectorRegion, params: &DeploymentParams) -> f64 {
    let phi = params.blockage;
    let t_max = region.radius * phi;
    let target = u.clamp(0.0, 1.0) * lower_incomplete_gamma(2.0, t_max);
    let (mut lo, mut hi) = (0.0, t_max);
    let mut t = 0.5 * t_max;
    for _ in 0..100 {
        let g = lower_incomplete_gamma(2.0, t) - target;
        if g > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let slope = t * (-t).exp();
        let mut next = if slope > 0.0 { t - g / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * t_max {
            t = next;
            break;
        }
        t = next;
    }
    t / phi
}

/// Draw a Poisson number of users and place them in the sector.
pub fn sample_users<R: Rng + ?Sized>(
    region: &SectorRegion,
    params: &DeploymentParams,
    rng: &mut R,
) -> Vec<UserLocation> {
    let count = sample_user_count(region, params, rng);
    sample_locations(count, region, params, rng)
}

/// Draw the sector's user count `K ~ Poisson(μ)`.
pub fn sample_user_count<R: Rng + ?Sized>(
    region: &SectorRegion,
    params: &DeploymentParams,
    rng: &mut R,
) -> usize {
    let mu = mean_measure(region, params);
    if mu <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(mu).expect("positive finite mean");
    poisson.sample(rng) as usize
}

/// Place `count` independent users according to the thinned density:
/// uniform in direction, radial law `∝ r e^{−φr}` on `[0, R]`.
pub fn sample_locations<R: Rng + ?Sized>(
    count: usize,
    region: &SectorRegion,
    params: &DeploymentParams,
    rng: &mut R,
) -> Vec<UserLocation> {
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            UserLocation {
                distance: radial_quantile(u, region, params),
                direction: wrap_direction(
                    region.beam_direction + region.half_angle * (2.0 * v - 1.0),
                ),
            }
        })
        .collect()
}

/// Density of the `k`-th smallest user distance (unconditioned on `K`, so it
/// integrates to `P(K ≥ k)` over `[0, R]`).
pub fn ordered_distance_pdf(k: u32, r: f64, region: &SectorRegion, params: &DeploymentParams) -> f64 {
    assert!(k >= 1, "distance order starts at 1");
    if !(0.0..=region.radius).contains(&r) {
        return 0.0;
    }
    let mu = mean_measure_within(r, region, params);
    let intensity = 2.0 * region.half_angle * params.density * (-r * params.blockage).exp() * r;
    intensity * poisson_pmf(u64::from(k - 1), mu)
}

/// Density of the `k`-th smallest of exactly `users` distances, drawn
/// i.i.d. from [`radial_density`].
pub fn ordered_distance_pdf_given(
    k: u32,
    users: u32,
    r: f64,
    region: &SectorRegion,
    params: &DeploymentParams,
) -> f64 {
    assert!(k >= 1 && k <= users, "order {k} out of range for {users} users");
    if !(0.0..=region.radius).contains(&r) {
        return 0.0;
    }
    let phi = params.blockage;
    let cdf = (lower_incomplete_gamma(2.0, r * phi) / lower_incomplete_gamma(2.0, region.radius * phi)).min(1.0);
    let coeff = f64::from(users) * crate::mathkit::binomial(u64::from(users - 1), u64::from(k - 1));
    coeff * cdf.powi(k as i32 - 1) * (1.0 - cdf).powi((users - k) as i32) * radial_density(r, region, params)
}

/// `P(d_k ≤ r) = 1 − Σ_{i<k} Poisson(μ(r), i)`.
pub fn ordered_distance_cdf(k: u32, r: f64, region: &SectorRegion, params: &DeploymentParams) -> f64 {
    assert!(k >= 1, "distance order starts at 1");
    let r = r.clamp(0.0, region.radius);
    let mu = mean_measure_within(r, region, params);
    let below: f64 = (0..u64::from(k)).map(|i| poisson_pmf(i, mu)).sum();
    (1.0 - below).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn baseline() -> (SectorRegion, DeploymentParams) {
        (SectorRegion::new(0.0, 0.1, 10.0).unwrap(), DeploymentParams::new(1.0, 0.1).unwrap())
    }

    #[test]
    fn mean_measure_examples() {
        let (region, params) = baseline();
        assert_abs_diff_eq!(mean_measure(&region, &params), 5.28482, epsilon = 1e-5);

        let empty = SectorRegion { radius: 0.0, ..region };
        assert_eq!(mean_measure(&empty, &params), 0.0);

        let narrow = SectorRegion::new(0.0, 0.05, 10.0).unwrap();
        let dense = DeploymentParams::new(2.0, 0.1).unwrap();
        assert_abs_diff_eq!(
            mean_measure(&narrow, &dense),
            mean_measure(&region, &params),
            epsilon = 1e-12
        );
    }

    #[test]
    fn count_pmf_examples() {
        let (region, params) = baseline();
        assert_abs_diff_eq!(user_count_pmf(0, &region, &params), (-5.28482f64).exp(), epsilon = 1e-7);
        assert_abs_diff_eq!(user_count_pmf(5, &region, &params), 0.17410, epsilon = 1e-5);
        let total: f64 = (0..=60).map(|k| user_count_pmf(k, &region, &params)).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ordered_distance_examples() {
        let (region, params) = baseline();
        assert_eq!(ordered_distance_pdf(1, 0.0, &region, &params), 0.0);
        assert_eq!(ordered_distance_cdf(1, 0.0, &region, &params), 0.0);
        let mu: f64 = 5.28482;
        let expected = 1.0 - (-mu).exp() * (1.0 + mu + mu * mu / 2.0);
        assert_abs_diff_eq!(ordered_distance_cdf(3, 10.0, &region, &params), expected, epsilon = 1e-5);
        assert_abs_diff_eq!(expected, 0.8974, epsilon = 1e-4);
    }

    #[test]
    fn conditional_order_density_integrates_to_one() {
        let (region, params) = baseline();
        let n = 4000;
        let h = region.radius / n as f64;
        for k in 1..=4 {
            let mass: f64 = (0..n)
                .map(|s| ordered_distance_pdf_given(k, 4, (s as f64 + 0.5) * h, &region, &params) * h)
                .sum();
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(DeploymentParams::new(1.0, 0.0).is_err());
        assert!(DeploymentParams::new(0.0, 0.1).is_err());
        assert!(SectorRegion::new(0.0, 0.0, 10.0).is_err());
        assert!(SectorRegion::new(0.0, 1.5, 10.0).is_err());
        assert!(SectorRegion::new(0.0, 0.1, -1.0).is_err());
    }

    #[test]
    fn quantile_inverts_the_radial_cdf() {
        let (region, params) = baseline();
        let norm = lower_incomplete_gamma(2.0, 1.0);
        for i in 0..=50 {
            let u = i as f64 / 50.0;
            let r = radial_quantile(u, &region, &params);
            assert!((0.0..=10.0).contains(&r));
            assert_abs_diff_eq!(lower_incomplete_gamma(2.0, r * 0.1) / norm, u, epsilon = 1e-12);
        }
    }

    #[test]
    fn samples_stay_inside_wrapped_sector() {
        let region = SectorRegion::new(0.97, 0.1, 10.0).unwrap();
        let params = DeploymentParams::new(3.0, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            for user in sample_users(&region, &params, &mut rng) {
                assert!(region.contains(&user), "{user:?}");
                assert!((-1.0..1.0).contains(&user.direction));
            }
        }
    }
}
