use std::fmt;

use crate::error::ParamError;
use crate::geometry::{mean_measure, DeploymentParams, SectorRegion};
use crate::noma::{PowerSplit, RateTargets, SnrConfig};

/// Scalar model parameters shared by the analytic and Monte Carlo paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// `M`, antennas at the base station.
    pub antennas: u32,
    /// `λ`, users per unit area before blockage.
    pub density: f64,
    /// `Δ`, sector half-width in normalized-direction units.
    pub half_angle: f64,
    /// `φ`, blockage parameter per meter.
    pub blockage: f64,
    /// `R_D`, cell radius in meters.
    pub radius: f64,
    /// `α`, LOS path-loss exponent.
    pub path_loss_exponent: f64,
    pub split: PowerSplit,
    pub rates: RateTargets,
    pub noise_dbm: f64,
}

impl SystemParams {
    /// The reference numerical setup: `M = 4`, `λ = 1`, `Δ = 0.1`, `φ = 0.1`,
    /// `R_D = 10 m`, `α = 2`, shares `(3/4, 1/4)`, rates `(0.5, 6)` BPCU and
    /// a −30 dBm noise floor.
    pub fn reference() -> Self {
        Self {
            antennas: 4,
            density: 1.0,
            half_angle: 0.1,
            blockage: 0.1,
            radius: 10.0,
            path_loss_exponent: 2.0,
            split: PowerSplit::new(0.75, 0.25).expect("valid split"),
            rates: RateTargets::new(0.5, 6.0).expect("valid rates"),
            noise_dbm: SnrConfig::DEFAULT_NOISE_DBM,
        }
    }

    pub fn with_rates(self, weak: f64, strong: f64) -> Self {
        Self { rates: RateTargets::new(weak, strong).expect("positive rates"), ..self }
    }

    /// Every violated invariant, not only the first.
    pub fn validate(&self) -> Result<(), Vec<ParamError>> {
        let mut errors = Vec::new();
        if self.antennas == 0 {
            errors.push(ParamError::new("antennas", "must be at least 1"));
        }
        if let Err(e) = SectorRegion::new(0.0, self.half_angle, self.radius) {
            errors.push(e);
        }
        if let Err(e) = DeploymentParams::new(self.density, self.blockage) {
            errors.push(e);
        }
        if !(self.path_loss_exponent > 0.0 && self.path_loss_exponent.is_finite()) {
            errors.push(ParamError::new("path_loss_exponent", "must be positive"));
        }
        if !self.noise_dbm.is_finite() {
            errors.push(ParamError::new("noise_dbm", "must be finite"));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// The scheduled sector, centred on direction 0.
    pub fn region(&self) -> SectorRegion {
        SectorRegion { beam_direction: 0.0, half_angle: self.half_angle, radius: self.radius }
    }

    pub fn deployment(&self) -> DeploymentParams {
        DeploymentParams { density: self.density, blockage: self.blockage }
    }

    /// Expected number of users in the sector.
    pub fn mean_users(&self) -> f64 {
        mean_measure(&self.region(), &self.deployment())
    }

    /// Linear transmit SNR at a transmit power in dBm.
    pub fn rho(&self, power_dbm: f64) -> f64 {
        SnrConfig { transmit_power_dbm: power_dbm, noise_power_dbm: self.noise_dbm }.rho()
    }
}

/// Position of a user in an ascending ordering (by gain or by distance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UserOrder {
    /// The `n`-th user, counting from 1.
    Nth(u32),
    /// The last user of the ordering, i.e. `K` itself.
    Last,
}

impl UserOrder {
    /// 1-based index among `k` users, if such a user exists.
    pub fn resolve(self, k: usize) -> Option<usize> {
        match self {
            UserOrder::Nth(n) if n >= 1 && (n as usize) <= k => Some(n as usize),
            UserOrder::Nth(_) => None,
            UserOrder::Last if k >= 1 => Some(k),
            UserOrder::Last => None,
        }
    }
}

impl fmt::Display for UserOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UserOrder::Nth(n) => write!(f, "{n}"),
            UserOrder::Last => write!(f, "K"),
        }
    }
}

/// What to do with a NOMA pair whose strong-user order exceeds the number of
/// users present (`2 ≤ K < j`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairFallback {
    /// The pair cannot be formed: no rate.
    #[default]
    ZeroRate,
    /// Use the strongest available user as the strong partner instead.
    ClampToAvailable,
}

/// Resolve a weak/strong gain-ordered pair among `k` users.
pub fn resolve_gain_pair(
    weak: UserOrder,
    strong: UserOrder,
    k: usize,
    fallback: PairFallback,
) -> Option<(usize, usize)> {
    let i = weak.resolve(k)?;
    let j = match (strong.resolve(k), fallback) {
        (Some(j), _) => j,
        (None, PairFallback::ClampToAvailable) => k,
        (None, PairFallback::ZeroRate) => return None,
    };
    (i < j).then_some((i, j))
}
