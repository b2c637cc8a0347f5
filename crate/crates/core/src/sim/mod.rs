//! Seeded Monte Carlo engine.
//!
//! Every trial draws one deployment ([`Realization`]) from its own random
//! stream, derived from `(master_seed, trial index)`, and evaluates it at all
//! requested SNRs (common random numbers across the power grid). Trials are
//! processed in fixed-size batches on the rayon pool and the batch results
//! are merged in index order, so the output does not depend on the number of
//! threads.

mod stats;

pub use stats::{Aggregate, OutageCount, RunningMean};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::analytic::ThresholdRule;
use crate::channel::{effective_gain, sample_fading, BeamSet, ChannelRealization};
use crate::error::ParamError;
use crate::geometry::{mean_measure, sample_locations, sample_user_count};
use crate::mathkit::poisson_pmf;
use crate::noma::{
    eta_thresholds, multibeam_outage_events, multibeam_sinrs, noma_outage_events, oma_outage_event,
    oma_outage_with_interference,
};
use crate::params::{resolve_gain_pair, PairFallback, SystemParams, UserOrder};

/// Trials per parallel work unit. Part of the determinism contract: the
/// reduction order depends on it, not on the thread count.
pub const BATCH_SIZE: u64 = 1024;

/// Scheduling rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Users ordered by ascending effective gain; the pair is (`weak`, `strong`).
    PerfectCsi { weak: UserOrder, strong: UserOrder, fallback: PairFallback },
    /// Users ordered by ascending distance; `weak` is the farther (`weak > strong`).
    DistanceOnly { weak: u32, strong: u32 },
    /// One-bit feedback against a threshold `ξ`.
    OneBit { rule: ThresholdRule },
    /// `beams` random orthogonal beams, each pairing its `weak`-th and
    /// `strong`-th nearest users.
    MultiBeam { beams: usize, weak: u32, strong: u32 },
}

impl Scheme {
    fn beams(&self) -> usize {
        match *self {
            Scheme::MultiBeam { beams, .. } => beams,
            _ => 1,
        }
    }
}

/// Law of the number of users in each sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UserCount {
    #[default]
    Poisson,
    /// Condition on exactly this many users (rejection on the Poisson count).
    Fixed(usize),
}

/// A fully specified Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experiment {
    pub scheme: Scheme,
    pub params: SystemParams,
    pub users: UserCount,
    /// Rate of a lone user served by OMA; the weak-user rate when unset.
    pub single_user_rate: Option<f64>,
}

impl Experiment {
    pub fn new(scheme: Scheme, params: SystemParams) -> Self {
        Self { scheme, params, users: UserCount::Poisson, single_user_rate: None }
    }

    pub fn conditioned_on(self, users: usize) -> Self {
        Self { users: UserCount::Fixed(users), ..self }
    }

    /// Every violated invariant of the parameters and the scheme.
    pub fn validate(&self) -> Result<(), Vec<ParamError>> {
        let p = &self.params;
        let mut errors = p.validate().err().unwrap_or_default();
        let e1 = p.rates.weak_threshold();
        if p.split.weak_share() <= p.split.strong_share() * e1 {
            errors.push(ParamError::new(
                "split",
                format!(
                    "infeasible: weak share {} must exceed strong share × (2^R_weak − 1) = {}",
                    p.split.weak_share(),
                    p.split.strong_share() * e1
                ),
            ));
        }
        match self.scheme {
            Scheme::PerfectCsi { weak, strong, .. } => match (weak, strong) {
                (UserOrder::Nth(i), UserOrder::Nth(j)) if i >= 1 && i < j => {}
                (UserOrder::Nth(i), UserOrder::Last) if i >= 1 => {}
                _ => errors.push(ParamError::new("scheme", "perfect CSI needs weak order i ≥ 1 below strong order j")),
            },
            Scheme::DistanceOnly { weak, strong } => {
                if !(strong >= 1 && weak > strong) {
                    errors.push(ParamError::new("scheme", "distance ordering needs weak > strong ≥ 1"));
                }
            }
            Scheme::OneBit { rule } => {
                if let ThresholdRule::Fixed(xi) = rule {
                    if !(xi > 0.0 && xi.is_finite()) {
                        errors.push(ParamError::new("threshold", "fixed threshold must be positive"));
                    }
                }
            }
            Scheme::MultiBeam { beams, weak, strong } => {
                if !(strong >= 1 && weak > strong) {
                    errors.push(ParamError::new("scheme", "distance ordering needs weak > strong ≥ 1"));
                }
                if beams == 0 || beams > p.antennas as usize {
                    errors.push(ParamError::new("beams", format!("need 1 ≤ N ≤ M = {}", p.antennas)));
                } else if beams as f64 * 2.0 * p.half_angle > 2.0 + 1e-12 {
                    errors.push(ParamError::new(
                        "beams",
                        format!("sectors overlap: N·2Δ = {} exceeds 2", beams as f64 * 2.0 * p.half_angle),
                    ));
                }
            }
        }
        if let UserCount::Fixed(k) = self.users {
            let mass = poisson_pmf(k as u64, p.mean_users());
            if !(mass >= 1e-7) {
                errors.push(ParamError::new("users", format!("P(K = {k}) = {mass:e} is too small to condition on")));
            }
        }
        if let Some(r) = self.single_user_rate {
            if !(r > 0.0 && r.is_finite()) {
                errors.push(ParamError::new("single_user_rate", "must be positive"));
            }
        }
        if errors.is_empty() { Ok(()) } else { Err(errors) }
    }

    fn lone_rate(&self) -> f64 {
        self.single_user_rate.unwrap_or(self.params.rates.weak_rate())
    }
}

/// One user of a sector, with its gains against its own and the other beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserDraw {
    pub channel: ChannelRealization,
    /// Effective gain on the sector's own beam.
    pub gain: f64,
    /// Sum of the effective gains on all other beams.
    pub interference: f64,
}

/// Users of one beam's sector, sorted by ascending distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorDraw {
    pub beam_direction: f64,
    pub users: Vec<UserDraw>,
}

/// One deployment: every sector plus the uniforms used for random selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub sectors: Vec<SectorDraw>,
    pub selection: [f64; 3],
}

/// Per-role result of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoleOutcome {
    /// The scheduled user exists (else the trial is excluded for this role).
    pub exists: bool,
    pub noma_outage: bool,
    pub oma_outage: bool,
}

impl RoleOutcome {
    const ABSENT: Self = Self { exists: false, noma_outage: true, oma_outage: true };
}

/// Result of one trial at one SNR. Outage flags refer to the first beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// Users in the first sector.
    pub users: usize,
    /// Positions (in distance order) of the scheduled weak and strong users.
    pub pair: Option<(usize, usize)>,
    pub weak: RoleOutcome,
    pub strong: RoleOutcome,
    /// Rate delivered by NOMA, summed over beams.
    pub noma_rate: f64,
    /// Rate delivered by the OMA baseline on the same drop.
    pub oma_rate: f64,
}

impl TrialOutcome {
    fn no_service(users: usize) -> Self {
        Self { users, pair: None, weak: RoleOutcome::ABSENT, strong: RoleOutcome::ABSENT, noma_rate: 0.0, oma_rate: 0.0 }
    }
}

/// Random stream of trial `index` under `master_seed`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn draw_count<R: Rng + ?Sized>(exp: &Experiment, sector: &crate::geometry::SectorRegion, rng: &mut R) -> usize {
    let deployment = exp.params.deployment();
    match exp.users {
        UserCount::Poisson => sample_user_count(sector, &deployment, rng),
        UserCount::Fixed(k) => {
            let mu = mean_measure(sector, &deployment);
            if mu <= 0.0 {
                assert_eq!(k, 0, "an empty sector cannot hold {k} users");
                return 0;
            }
            let poisson = Poisson::new(mu).expect("positive finite mean");
            loop {
                if poisson.sample(rng) as usize == k {
                    break k;
                }
            }
        }
    }
}

/// Draw a deployment: base direction, then for each beam the user count,
/// locations and fading, then three selection uniforms.
pub fn sample_realization<R: Rng + ?Sized>(exp: &Experiment, rng: &mut R) -> Realization {
    let p = &exp.params;
    let zeta = 2.0 * rng.random::<f64>() - 1.0;
    let beams = match exp.scheme {
        Scheme::MultiBeam { beams, .. } => BeamSet::new(beams, zeta, p.antennas).expect("validated beam count"),
        _ => BeamSet::single(zeta),
    };
    debug_assert_eq!(beams.count(), exp.scheme.beams());
    let base = p.region();
    let deployment = p.deployment();
    let mut channels: Vec<Vec<ChannelRealization>> = Vec::with_capacity(beams.count());
    for &dir in beams.directions() {
        let sector = base.steered(dir);
        let count = draw_count(exp, &sector, rng);
        let locations = sample_locations(count, &sector, &deployment, rng);
        let mut users: Vec<ChannelRealization> = locations
            .into_iter()
            .map(|location| ChannelRealization { fading_power: sample_fading(rng), location })
            .collect();
        users.sort_by(|a, b| a.location.distance.total_cmp(&b.location.distance));
        channels.push(users);
    }
    let selection = [rng.random(), rng.random(), rng.random()];
    let dirs = beams.directions();
    let sectors = channels
        .into_iter()
        .enumerate()
        .map(|(m, users)| SectorDraw {
            beam_direction: dirs[m],
            users: users
                .into_iter()
                .map(|channel| {
                    let gain = effective_gain(&channel, dirs[m], p.antennas, p.path_loss_exponent);
                    let interference = dirs
                        .iter()
                        .enumerate()
                        .filter(|&(n, _)| n != m)
                        .map(|(_, &d)| effective_gain(&channel, d, p.antennas, p.path_loss_exponent))
                        .fold(0.0, |acc, g| acc + g);
                    UserDraw { channel, gain, interference }
                })
                .collect(),
        })
        .collect();
    Realization { sectors, selection }
}

fn pick(u: f64, n: usize) -> usize {
    ((u * n as f64) as usize).min(n - 1)
}

/// One-bit selection among users with the given gains: weak from
/// `S₁ = {g ≤ ξ}`, strong from `S₂ = {g > ξ}`; if one set is empty, two
/// distinct users of the other set with roles assigned by `u[2]`.
pub fn onebit_pair(gains: &[f64], xi: f64, u: [f64; 3]) -> (usize, usize) {
    assert!(gains.len() >= 2, "a pair needs at least two users");
    let (below, above): (Vec<usize>, Vec<usize>) = (0..gains.len()).partition(|&n| gains[n] <= xi);
    if !below.is_empty() && !above.is_empty() {
        return (below[pick(u[0], below.len())], above[pick(u[1], above.len())]);
    }
    let group = if below.is_empty() { above } else { below };
    let a = pick(u[0], group.len());
    let mut b = pick(u[1], group.len() - 1);
    if b >= a {
        b += 1;
    }
    if u[2] < 0.5 { (group[a], group[b]) } else { (group[b], group[a]) }
}

fn lone_user(exp: &Experiment, users: usize, gain: f64, rho: f64) -> TrialOutcome {
    let rate = exp.lone_rate();
    let served = if oma_outage_event(gain, rate, rho) { 0.0 } else { rate };
    TrialOutcome { noma_rate: served, oma_rate: served, ..TrialOutcome::no_service(users) }
}

/// NOMA and OMA outcome of a single-beam pair chosen from gains.
fn gain_pair(exp: &Experiment, users: usize, pair: (usize, usize), g_weak: f64, g_strong: f64, rho: f64) -> TrialOutcome {
    let p = &exp.params;
    let flags = noma_outage_events(g_weak, g_strong, &p.split, &p.rates, rho);
    let weak = RoleOutcome {
        exists: true,
        noma_outage: flags.weak,
        oma_outage: oma_outage_event(g_weak, p.rates.weak_rate(), rho),
    };
    let strong = RoleOutcome {
        exists: true,
        noma_outage: flags.strong,
        oma_outage: oma_outage_event(g_strong, p.rates.strong_rate(), rho),
    };
    TrialOutcome {
        users,
        pair: Some(pair),
        weak,
        strong,
        noma_rate: served_rate(p, &weak, &strong, |r| r.noma_outage),
        oma_rate: served_rate(p, &weak, &strong, |r| r.oma_outage),
    }
}

fn served_rate(p: &SystemParams, weak: &RoleOutcome, strong: &RoleOutcome, outage: impl Fn(&RoleOutcome) -> bool) -> f64 {
    let mut rate = 0.0;
    if !outage(weak) {
        rate += p.rates.weak_rate();
    }
    if !outage(strong) {
        rate += p.rates.strong_rate();
    }
    rate
}

/// Distance-ordered pair on one sector with inter-beam interference. A pair
/// whose weak user is missing is not served, but the link-level outage of
/// an existing strong user is still recorded.
fn distance_pair(exp: &Experiment, sector: &SectorDraw, weak: u32, strong: u32, rho: f64) -> TrialOutcome {
    let p = &exp.params;
    let users = &sector.users;
    let k = users.len();
    let (i, j) = (weak as usize, strong as usize);
    let w = users.get(i - 1);
    let s = users.get(j - 1);
    let (gw, iw) = w.map_or((0.0, 0.0), |u| (u.gain, u.interference));
    let (gs, is) = s.map_or((0.0, 0.0), |u| (u.gain, u.interference));
    let sinrs = multibeam_sinrs(gs, is, gw, iw, &p.split, rho);
    let flags = multibeam_outage_events(&sinrs, &p.rates);
    let weak_outcome = match w {
        Some(_) => RoleOutcome {
            exists: true,
            noma_outage: flags.weak,
            oma_outage: oma_outage_with_interference(gw, iw, p.rates.weak_rate(), rho),
        },
        None => RoleOutcome::ABSENT,
    };
    let strong_outcome = match s {
        Some(_) => RoleOutcome {
            exists: true,
            noma_outage: flags.strong,
            oma_outage: oma_outage_with_interference(gs, is, p.rates.strong_rate(), rho),
        },
        None => RoleOutcome::ABSENT,
    };
    let formed = weak_outcome.exists && strong_outcome.exists;
    TrialOutcome {
        users: k,
        pair: formed.then_some((i - 1, j - 1)),
        weak: weak_outcome,
        strong: strong_outcome,
        noma_rate: if formed { served_rate(p, &weak_outcome, &strong_outcome, |r| r.noma_outage) } else { 0.0 },
        oma_rate: if formed { served_rate(p, &weak_outcome, &strong_outcome, |r| r.oma_outage) } else { 0.0 },
    }
}

/// Apply the scheme's scheduling rule to a drop and decide outages at `rho`.
pub fn evaluate(exp: &Experiment, real: &Realization, rho: f64) -> TrialOutcome {
    let first = &real.sectors[0];
    let users = &first.users;
    let k = users.len();
    match exp.scheme {
        Scheme::PerfectCsi { weak, strong, fallback } => {
            match k {
                0 => return TrialOutcome::no_service(0),
                1 => return lone_user(exp, 1, users[0].gain, rho),
                _ => {}
            }
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| users[a].gain.total_cmp(&users[b].gain).then(a.cmp(&b)));
            match resolve_gain_pair(weak, strong, k, fallback) {
                None => TrialOutcome::no_service(k),
                Some((i, j)) => {
                    let (a, b) = (order[i - 1], order[j - 1]);
                    gain_pair(exp, k, (a, b), users[a].gain, users[b].gain, rho)
                }
            }
        }
        Scheme::OneBit { rule } => {
            match k {
                0 => return TrialOutcome::no_service(0),
                1 => return lone_user(exp, 1, users[0].gain, rho),
                _ => {}
            }
            let p = &exp.params;
            let xi = match (eta_thresholds(&p.split, &p.rates, rho), rule) {
                (_, ThresholdRule::Fixed(xi)) => xi,
                (Some(eta), rule) => rule.threshold(&eta, k, rho),
                (None, _) => 0.0,
            };
            let gains: Vec<f64> = users.iter().map(|u| u.gain).collect();
            let (a, b) = onebit_pair(&gains, xi, real.selection);
            gain_pair(exp, k, (a, b), gains[a], gains[b], rho)
        }
        Scheme::DistanceOnly { weak, strong } => distance_pair(exp, first, weak, strong, rho),
        Scheme::MultiBeam { weak, strong, .. } => {
            let mut outcome = distance_pair(exp, first, weak, strong, rho);
            for sector in &real.sectors[1..] {
                let other = distance_pair(exp, sector, weak, strong, rho);
                outcome.noma_rate += other.noma_rate;
                outcome.oma_rate += other.oma_rate;
            }
            outcome
        }
    }
}

/// Draw one deployment from `rng` and evaluate it at `rho`.
pub fn run_trial<R: Rng + ?Sized>(exp: &Experiment, rng: &mut R, rho: f64) -> TrialOutcome {
    evaluate(exp, &sample_realization(exp, rng), rho)
}

/// Aggregate `n_trials` trials at every SNR in `rhos` (linear scale).
///
/// The experiment must satisfy [`Experiment::validate`].
pub fn run_experiment(exp: &Experiment, rhos: &[f64], n_trials: u64, master_seed: u64) -> Vec<Aggregate> {
    let batches = n_trials.div_ceil(BATCH_SIZE);
    let partials: Vec<Vec<Aggregate>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![Aggregate::default(); rhos.len()];
            let end = ((b + 1) * BATCH_SIZE).min(n_trials);
            for t in b * BATCH_SIZE..end {
                let mut rng = trial_rng(master_seed, t);
                let real = sample_realization(exp, &mut rng);
                for (agg, &rho) in acc.iter_mut().zip(rhos) {
                    agg.record(&evaluate(exp, &real, rho));
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Aggregate::default(); rhos.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total
}

/// Results of a power sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub powers_dbm: Vec<f64>,
    pub points: Vec<Aggregate>,
}

/// [`run_experiment`] over a grid of transmit powers in dBm.
pub fn sweep(exp: &Experiment, powers_dbm: &[f64], n_trials: u64, master_seed: u64) -> Sweep {
    let rhos: Vec<f64> = powers_dbm.iter().map(|&p| exp.params.rho(p)).collect();
    Sweep { powers_dbm: powers_dbm.to_vec(), points: run_experiment(exp, &rhos, n_trials, master_seed) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perfect() -> Experiment {
        Experiment::new(
            Scheme::PerfectCsi { weak: UserOrder::Nth(1), strong: UserOrder::Last, fallback: PairFallback::ZeroRate },
            SystemParams::reference(),
        )
    }

    fn drop_with(gains: &[f64]) -> Realization {
        let users = gains
            .iter()
            .enumerate()
            .map(|(n, &g)| UserDraw {
                channel: ChannelRealization {
                    fading_power: g,
                    location: crate::geometry::UserLocation { distance: n as f64, direction: 0.0 },
                },
                gain: g,
                interference: 0.0,
            })
            .collect();
        Realization { sectors: vec![SectorDraw { beam_direction: 0.0, users }], selection: [0.1, 0.6, 0.2] }
    }

    #[test]
    fn empty_drop_is_no_service() {
        let out = evaluate(&perfect(), &drop_with(&[]), 1e6);
        assert_eq!(out.pair, None);
        assert!(!out.weak.exists && !out.strong.exists);
        assert_eq!(out.noma_rate, 0.0);
    }

    #[test]
    fn lone_user_uses_doubled_oma_target() {
        let exp = perfect();
        let rho = 1024.0;
        // 2^{2·0.5} − 1 = 1, so the boundary gain is 1/ρ.
        let served = evaluate(&exp, &drop_with(&[1.0 / rho]), rho);
        assert_eq!(served.noma_rate, 0.5);
        let lost = evaluate(&exp, &drop_with(&[0.999 / rho]), rho);
        assert_eq!(lost.noma_rate, 0.0);
        assert!(!served.weak.exists);
    }

    #[test]
    fn perfect_csi_selects_by_gain_and_ignores_common_scaling() {
        let exp = perfect();
        let gains = [0.3, 0.01, 2.0, 0.5];
        let out = evaluate(&exp, &drop_with(&gains), 1e6);
        assert_eq!(out.pair, Some((1, 2)));
        let scaled: Vec<f64> = gains.iter().map(|g| g * 7.5).collect();
        assert_eq!(evaluate(&exp, &drop_with(&scaled), 1e6).pair, Some((1, 2)));
    }

    #[test]
    fn onebit_selection_rules() {
        let gains = [0.1, 0.5, 0.2, 0.9];
        let (w, s) = onebit_pair(&gains, 0.3, [0.99, 0.0, 0.0]);
        assert_eq!((w, s), (2, 1));
        let (w, s) = onebit_pair(&gains, 0.0, [0.0, 0.0, 0.2]);
        assert_ne!(w, s);
        assert_eq!((w, s), (0, 1));
        let (w2, s2) = onebit_pair(&gains, 0.0, [0.0, 0.0, 0.7]);
        assert_eq!((w2, s2), (s, w));
        let (w, s) = onebit_pair(&gains, 10.0, [0.9, 0.9, 0.1]);
        assert_eq!((w, s), (3, 2));
    }

    #[test]
    fn validation_reports_every_problem() {
        let mut exp = Experiment::new(Scheme::MultiBeam { beams: 4, weak: 1, strong: 1 }, SystemParams {
            half_angle: 0.3,
            ..SystemParams::reference()
        });
        exp.params.split = crate::noma::PowerSplit::new(0.5, 0.5).unwrap();
        exp.params = exp.params.with_rates(1.0, 6.0);
        let errs = exp.validate().unwrap_err();
        let fields: Vec<_> = errs.iter().map(|e| e.field).collect();
        assert!(fields.contains(&"split"), "{fields:?}");
        assert!(fields.contains(&"beams"), "{fields:?}");
        assert!(fields.contains(&"scheme"), "{fields:?}");
        assert!(perfect().validate().is_ok());
    }

    #[test]
    fn same_seed_same_outcomes() {
        let exp = perfect();
        let rhos = [1e3, 1e6];
        let a = run_experiment(&exp, &rhos, 3000, 42);
        let b = run_experiment(&exp, &rhos, 3000, 42);
        assert_eq!(a, b);
        let c = run_experiment(&exp, &rhos, 3000, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn conditioning_fixes_the_count() {
        let exp = perfect().conditioned_on(5);
        let mut rng = trial_rng(1, 0);
        for _ in 0..50 {
            let real = sample_realization(&exp, &mut rng);
            assert_eq!(real.sectors[0].users.len(), 5);
            let d: Vec<f64> = real.sectors[0].users.iter().map(|u| u.channel.location.distance).collect();
            assert!(d.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn single_beam_multibeam_matches_distance_only() {
        let params = SystemParams::reference();
        let ds = Experiment::new(Scheme::DistanceOnly { weak: 4, strong: 1 }, params);
        let mb = Experiment::new(Scheme::MultiBeam { beams: 1, weak: 4, strong: 1 }, params);
        let rhos = [1e2, 1e4, 1e6];
        assert_eq!(run_experiment(&ds, &rhos, 2000, 9), run_experiment(&mb, &rhos, 2000, 9));
    }
}
