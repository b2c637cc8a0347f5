//! SINR arithmetic and outage predicates for two-user NOMA and the OMA
//! baseline.
//!
//! Outage is a strict inequality: an SINR exactly equal to its target counts
//! as success.

use crate::error::ParamError;

/// Power shares `β_i²` (weak user) and `β_j²` (strong user).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    weak_share: f64,
    strong_share: f64,
}

impl PowerSplit {
    pub fn new(weak_share: f64, strong_share: f64) -> Result<Self, ParamError> {
        if !(strong_share > 0.0) {
            return Err(ParamError::new("strong_share", "must be positive"));
        }
        if weak_share < strong_share {
            return Err(ParamError::new(
                "weak_share",
                format!("weak share {weak_share} must be at least the strong share {strong_share}"),
            ));
        }
        if (weak_share + strong_share - 1.0).abs() > 1e-9 {
            return Err(ParamError::new(
                "weak_share",
                format!("shares must sum to 1, got {}", weak_share + strong_share),
            ));
        }
        Ok(Self { weak_share, strong_share })
    }

    /// Split given by the weak user's share alone.
    pub fn from_weak_share(weak_share: f64) -> Result<Self, ParamError> {
        Self::new(weak_share, 1.0 - weak_share)
    }

    pub fn weak_share(&self) -> f64 {
        self.weak_share
    }

    pub fn strong_share(&self) -> f64 {
        self.strong_share
    }
}

/// Target rate in bits per channel use.
pub fn rate_threshold(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

/// OMA target: each user gets half the resource, so it must carry `2R`.
pub fn oma_rate_threshold(rate: f64) -> f64 {
    (2.0 * rate).exp2() - 1.0
}

/// Rates `R_i`, `R_j` and the SINR targets `ε = 2^R − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTargets {
    weak_rate: f64,
    strong_rate: f64,
}

impl RateTargets {
    pub fn new(weak_rate: f64, strong_rate: f64) -> Result<Self, ParamError> {
        if !(weak_rate > 0.0 && weak_rate.is_finite()) {
            return Err(ParamError::new("weak_rate", "must be positive"));
        }
        if !(strong_rate > 0.0 && strong_rate.is_finite()) {
            return Err(ParamError::new("strong_rate", "must be positive"));
        }
        Ok(Self { weak_rate, strong_rate })
    }

    pub fn weak_rate(&self) -> f64 {
        self.weak_rate
    }

    pub fn strong_rate(&self) -> f64 {
        self.strong_rate
    }

    pub fn weak_threshold(&self) -> f64 {
        rate_threshold(self.weak_rate)
    }

    pub fn strong_threshold(&self) -> f64 {
        rate_threshold(self.strong_rate)
    }
}

/// Transmit power and noise floor in dBm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrConfig {
    pub transmit_power_dbm: f64,
    pub noise_power_dbm: f64,
}

impl SnrConfig {
    /// Noise floor used throughout the reference numerical setup.
    pub const DEFAULT_NOISE_DBM: f64 = -30.0;

    pub fn new(transmit_power_dbm: f64) -> Self {
        Self { transmit_power_dbm, noise_power_dbm: Self::DEFAULT_NOISE_DBM }
    }

    /// Linear transmit SNR `ρ = 10^{(P − noise)/10}`.
    pub fn rho(&self) -> f64 {
        10f64.powf((self.transmit_power_dbm - self.noise_power_dbm) / 10.0)
    }
}

/// `g·β_i² / (g·β_j² + 1/ρ)`: the weak user decoding its own message.
pub fn sinr_weak(gain: f64, split: &PowerSplit, rho: f64) -> f64 {
    gain * split.weak_share / (gain * split.strong_share + 1.0 / rho)
}

/// The strong user decoding its partner's message before SIC. Same formula as
/// [`sinr_weak`], evaluated at the strong user's gain.
pub fn sinr_sic(gain: f64, split: &PowerSplit, rho: f64) -> f64 {
    sinr_weak(gain, split, rho)
}

/// `ρ·g·β_j²` after the partner's message has been removed.
pub fn snr_strong(gain: f64, split: &PowerSplit, rho: f64) -> f64 {
    rho * gain * split.strong_share
}

/// Gain levels below which the weak and strong users are in outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaThresholds {
    pub weak: f64,
    pub strong: f64,
}

/// `η_i = (ε_i/ρ)/(β_i² − β_j²ε_i)` and `η_j = max{η_i, ε_j/(ρβ_j²)}`, or
/// `None` when `β_i² ≤ β_j²ε_i` (every transmission is in outage).
pub fn eta_thresholds(split: &PowerSplit, targets: &RateTargets, rho: f64) -> Option<EtaThresholds> {
    let eps_i = targets.weak_threshold();
    let eps_j = targets.strong_threshold();
    let margin = split.weak_share - split.strong_share * eps_i;
    if margin <= 0.0 {
        return None;
    }
    let weak = eps_i / rho / margin;
    let strong = weak.max(eps_j / (rho * split.strong_share));
    Some(EtaThresholds { weak, strong })
}

/// Outage flags of a scheduled NOMA pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutageFlags {
    pub weak: bool,
    pub strong: bool,
}

/// Outage of the scheduled weak and strong users, decided on the SINRs.
pub fn noma_outage_events(
    g_weak: f64,
    g_strong: f64,
    split: &PowerSplit,
    targets: &RateTargets,
    rho: f64,
) -> OutageFlags {
    let eps_i = targets.weak_threshold();
    let eps_j = targets.strong_threshold();
    if split.weak_share <= split.strong_share * eps_i {
        return OutageFlags { weak: true, strong: true };
    }
    OutageFlags {
        weak: sinr_weak(g_weak, split, rho) < eps_i,
        strong: !(sinr_sic(g_strong, split, rho) >= eps_i
            && snr_strong(g_strong, split, rho) >= eps_j),
    }
}

/// Same decision as [`noma_outage_events`], taken by comparing gains with the
/// η thresholds.
pub fn noma_outage_by_threshold(
    g_weak: f64,
    g_strong: f64,
    split: &PowerSplit,
    targets: &RateTargets,
    rho: f64,
) -> OutageFlags {
    match eta_thresholds(split, targets, rho) {
        None => OutageFlags { weak: true, strong: true },
        Some(eta) => OutageFlags { weak: g_weak < eta.weak, strong: g_strong < eta.strong },
    }
}

/// OMA outage `log₂(1 + ρg) < 2R`.
pub fn oma_outage_event(gain: f64, rate: f64, rho: f64) -> bool {
    rho * gain < oma_rate_threshold(rate)
}

/// OMA outage with inter-beam interference: `log₂(1 + g/(I + 1/ρ)) < 2R`.
pub fn oma_outage_with_interference(gain: f64, interference: f64, rate: f64, rho: f64) -> bool {
    gain / (interference + 1.0 / rho) < oma_rate_threshold(rate)
}

/// SINRs of a NOMA pair on one of several simultaneous beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultibeamSinrs {
    /// Strong user decoding the weak user's message.
    pub sic: f64,
    /// Strong user decoding its own message after SIC.
    pub strong: f64,
    /// Weak user decoding its own message.
    pub weak: f64,
}

/// `own_gain`/`interference` belong to the strong user and
/// `weak_gain`/`weak_interference` to the weak user; interference is the sum
/// of the user's effective gains on all other beams.
pub fn multibeam_sinrs(
    strong_gain: f64,
    strong_interference: f64,
    weak_gain: f64,
    weak_interference: f64,
    split: &PowerSplit,
    rho: f64,
) -> MultibeamSinrs {
    let noise = 1.0 / rho;
    let b1 = split.weak_share;
    let b2 = split.strong_share;
    MultibeamSinrs {
        sic: strong_gain * b1 / (strong_gain * b2 + strong_interference + noise),
        strong: strong_gain * b2 / (strong_interference + noise),
        weak: weak_gain * b1 / (weak_gain * b2 + weak_interference + noise),
    }
}

/// Outage flags for a multi-beam NOMA pair.
pub fn multibeam_outage_events(sinrs: &MultibeamSinrs, targets: &RateTargets) -> OutageFlags {
    let eps_i = targets.weak_threshold();
    let eps_j = targets.strong_threshold();
    OutageFlags {
        weak: sinrs.weak < eps_i,
        strong: !(sinrs.sic >= eps_i && sinrs.strong >= eps_j),
    }
}
