//! Fading draws and effective channel gains against analog beams.
//!
//! Only the line-of-sight path is modelled. The effective gain of a user at
//! distance `d` and normalized direction `θ` on a beam steered to `θ̄` is
//! `|a|² F_M(π(θ̄ − θ)) / (1 + d^α)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::ParamError;
use crate::geometry::UserLocation;
use crate::mathkit::{fejer_kernel, wrap_direction};

/// One user's small-scale fading power and position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub fading_power: f64,
    pub location: UserLocation,
}

/// `N` orthogonal beams at `ζ + 2(m−1)/N`, `m = 1..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSet {
    base_direction: f64,
    directions: Vec<f64>,
}

impl BeamSet {
    pub fn new(count: usize, base_direction: f64, antennas: u32) -> Result<Self, ParamError> {
        if count == 0 {
            return Err(ParamError::new("beams", "need at least one beam"));
        }
        if count > antennas as usize {
            return Err(ParamError::new(
                "beams",
                format!("{count} beams exceed the {antennas} antennas"),
            ));
        }
        let step = 2.0 / count as f64;
        let directions = (0..count)
            .map(|m| wrap_direction(base_direction + step * m as f64))
            .collect();
        Ok(Self { base_direction: wrap_direction(base_direction), directions })
    }

    /// A single beam pointed at `direction`.
    pub fn single(direction: f64) -> Self {
        let direction = wrap_direction(direction);
        Self { base_direction: direction, directions: vec![direction] }
    }

    pub fn count(&self) -> usize {
        self.directions.len()
    }

    pub fn base_direction(&self) -> f64 {
        self.base_direction
    }

    pub fn directions(&self) -> &[f64] {
        &self.directions
    }
}

/// Unit-mean exponential fading power, the law of `|a|²` for `a ~ CN(0, 1)`.
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Fejér-kernel array gain for a beam at `beam_direction` seen from `direction`.
pub fn array_gain(beam_direction: f64, direction: f64, antennas: u32) -> f64 {
    fejer_kernel(PI * wrap_direction(beam_direction - direction), antennas)
}

/// `1 + d^α`.
pub fn path_loss(distance: f64, alpha: f64) -> f64 {
    1.0 + distance.powf(alpha)
}

pub fn effective_gain(ch: &ChannelRealization, beam_direction: f64, antennas: u32, alpha: f64) -> f64 {
    ch.fading_power * array_gain(beam_direction, ch.location.direction, antennas)
        / path_loss(ch.location.distance, alpha)
}

/// Effective gain of one user against every beam of the set.
pub fn cross_gains(ch: &ChannelRealization, beams: &BeamSet, antennas: u32, alpha: f64) -> Vec<f64> {
    beams
        .directions()
        .iter()
        .map(|&dir| effective_gain(ch, dir, antennas, alpha))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn at(distance: f64, direction: f64, fading_power: f64) -> ChannelRealization {
        ChannelRealization { fading_power, location: UserLocation { distance, direction } }
    }

    #[test]
    fn effective_gain_examples() {
        assert_abs_diff_eq!(effective_gain(&at(0.0, 0.2, 1.0), 0.2, 4, 2.0), 4.0, epsilon = 1e-12);
        let g = effective_gain(&at(1.0, 0.0, 2.0), 0.25, 4, 2.0);
        let expected = (PI / 2.0).sin().powi(2) / (4.0 * (PI / 8.0).sin().powi(2));
        assert_abs_diff_eq!(g, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(g, 1.7071, epsilon = 1e-4);
        assert_abs_diff_eq!(effective_gain(&at(0.0, 0.0, 1.0), 0.5, 4, 2.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cross_gains_single_beam() {
        let ch = at(3.0, 0.1, 0.7);
        let beams = BeamSet::single(0.05);
        let gains = cross_gains(&ch, &beams, 4, 2.0);
        assert_eq!(gains, vec![effective_gain(&ch, 0.05, 4, 2.0)]);
    }

    #[test]
    fn cross_gains_null_when_beams_divide_antennas() {
        let beams = BeamSet::new(4, -0.3, 8).unwrap();
        let ch = at(0.0, beams.directions()[0], 1.0);
        let gains = cross_gains(&ch, &beams, 8, 2.0);
        assert_abs_diff_eq!(gains[0], 8.0, epsilon = 1e-12);
        for g in &gains[1..] {
            assert_abs_diff_eq!(*g, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn interference_shrinks_as_user_approaches_beam() {
        let beams = BeamSet::new(4, 0.0, 8).unwrap();
        let total = |offset: f64| -> f64 {
            cross_gains(&at(0.0, offset, 1.0), &beams, 8, 2.0)[1..].iter().sum()
        };
        let grid: Vec<f64> = (0..=20).map(|i| 0.1 * (20 - i) as f64 / 20.0).collect();
        let sums: Vec<f64> = grid.iter().map(|&o| total(o)).collect();
        assert!(sums.windows(2).all(|w| w[1] <= w[0] + 1e-15), "{sums:?}");
    }

    #[test]
    fn beam_set_validation() {
        assert!(BeamSet::new(0, 0.0, 4).is_err());
        assert!(BeamSet::new(5, 0.0, 4).is_err());
        let set = BeamSet::new(4, 0.9, 8).unwrap();
        assert_abs_diff_eq!(set.directions()[1], -0.6, epsilon = 1e-12);
    }

    #[test]
    fn fading_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_fading(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let tail = draws.iter().filter(|&&x| x > 1.0).count() as f64 / n as f64;
        assert!((mean - 1.0).abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
        assert!((tail - (-1f64).exp()).abs() < 0.003, "tail {tail}");
    }
}
