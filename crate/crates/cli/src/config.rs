//! Experiment configuration files.
//!
//! A configuration is a TOML document. Top-level keys set the run
//! (`name`, `description`, `mode`, `trials`, `seed`, `out`); the tables
//! `[system]`, `[rates]`, `[users]` and `[grid]` set the model, and every
//! `[[scheme]]` entry adds one scheduling scheme to the sweep:
//!
//! ```toml
//! mode = "both"
//! trials = 20000
//! seed = 7
//!
//! [system]
//! antennas = 4
//! half_angle = 0.1
//!
//! [rates]
//! weak = 0.5
//! strong = [4.0, 6.0]
//!
//! [[scheme]]
//! kind = "perfect-csi"
//! weak = 1
//! strong = "K"
//!
//! [users]
//! conditioned = [5]
//!
//! [grid]
//! start = 0.0
//! stop = 40.0
//! step = 2.0
//! ```

use std::fmt;
use std::path::PathBuf;

use mmwave_noma::analytic::ThresholdRule;
use mmwave_noma::noma::{PowerSplit, RateTargets};
use mmwave_noma::params::{PairFallback, SystemParams, UserOrder};
use mmwave_noma::sim::{Experiment, Scheme, UserCount};
use serde::Deserialize;

/// Which pipelines a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Analytic,
    #[serde(alias = "montecarlo", alias = "monte-carlo")]
    #[value(alias = "montecarlo")]
    Mc,
    #[default]
    Both,
}

impl Mode {
    pub fn analytic(self) -> bool {
        matches!(self, Mode::Analytic | Mode::Both)
    }

    pub fn monte_carlo(self) -> bool {
        matches!(self, Mode::Mc | Mode::Both)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub description: Option<String>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub rates: RatesSection,
    #[serde(default)]
    pub scheme: Vec<SchemeSection>,
    #[serde(default)]
    pub users: UsersSection,
    #[serde(default)]
    pub grid: GridSection,
}

fn default_trials() -> u64 {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub antennas: u32,
    pub density: f64,
    pub half_angle: f64,
    pub blockage: f64,
    pub radius: f64,
    pub path_loss_exponent: f64,
    pub weak_share: f64,
    pub strong_share: f64,
    pub noise_dbm: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        let p = SystemParams::reference();
        Self {
            antennas: p.antennas,
            density: p.density,
            half_angle: p.half_angle,
            blockage: p.blockage,
            radius: p.radius,
            path_loss_exponent: p.path_loss_exponent,
            weak_share: p.split.weak_share(),
            strong_share: p.split.strong_share(),
            noise_dbm: p.noise_dbm,
        }
    }
}

/// A single value or a list of values.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesSection {
    pub weak: f64,
    pub strong: OneOrMany<f64>,
    /// Rate of a lone user; defaults to `weak`.
    pub single_user: Option<f64>,
}

impl Default for RatesSection {
    fn default() -> Self {
        Self { weak: 0.5, strong: OneOrMany::One(6.0), single_user: None }
    }
}

/// A user order: a positive number or `"K"` for the last user.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    Index(u32),
    Name(String),
}

impl Default for OrderSpec {
    fn default() -> Self {
        OrderSpec::Name("K".into())
    }
}

/// A feedback threshold: a number, `"midpoint"` or `"eta-gap"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ThresholdSpec {
    Value(f64),
    Name(String),
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec::Name("midpoint".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackSpec {
    #[default]
    ZeroRate,
    Clamp,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SchemeSection {
    PerfectCsi {
        label: Option<String>,
        #[serde(default = "first")]
        weak: u32,
        #[serde(default)]
        strong: OrderSpec,
        #[serde(default)]
        fallback: FallbackSpec,
    },
    DistanceOnly {
        label: Option<String>,
        weak: u32,
        strong: u32,
    },
    OneBit {
        label: Option<String>,
        #[serde(default)]
        threshold: ThresholdSpec,
    },
    MultiBeam {
        label: Option<String>,
        beams: usize,
        weak: u32,
        strong: u32,
    },
}

fn first() -> u32 {
    1
}

impl SchemeSection {
    fn default_label(&self) -> &'static str {
        match self {
            SchemeSection::PerfectCsi { .. } => "csi",
            SchemeSection::DistanceOnly { .. } => "distance",
            SchemeSection::OneBit { .. } => "onebit",
            SchemeSection::MultiBeam { .. } => "multibeam",
        }
    }

    fn label(&self) -> String {
        let custom = match self {
            SchemeSection::PerfectCsi { label, .. }
            | SchemeSection::DistanceOnly { label, .. }
            | SchemeSection::OneBit { label, .. }
            | SchemeSection::MultiBeam { label, .. } => label.clone(),
        };
        custom.unwrap_or_else(|| self.default_label().to_string())
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsersSection {
    /// Exact user counts to condition on.
    pub conditioned: Vec<usize>,
    /// Also run with a Poisson user count; defaults to `true` only when
    /// `conditioned` is empty.
    pub poisson: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub powers_dbm: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
}

/// A configuration problem, named by its key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub field: String,
    pub reason: String,
}

impl ConfigIssue {
    fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { field: field.into(), reason: reason.into() }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{} invalid setting(s):\n  {}", .0.len(), .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n  "))]
    Invalid(Vec<ConfigIssue>),
}

/// One scheme at one strong-user rate and one user-count law.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub experiment: Experiment,
}

impl Series {
    /// Qualifier appended to metric names, e.g. `[R_strong=6;K=5]`.
    pub fn qualifier(&self) -> String {
        let users = match self.experiment.users {
            UserCount::Poisson => "poisson".to_string(),
            UserCount::Fixed(k) => k.to_string(),
        };
        format!("[R_strong={};K={}]", self.experiment.params.rates.strong_rate(), users)
    }
}

/// A validated, fully expanded run.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub name: String,
    pub mode: Mode,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub powers_dbm: Vec<f64>,
    pub series: Vec<Series>,
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(trials) = o.trials {
            self.trials = trials;
        }
        if let Some(mode) = o.mode {
            self.mode = mode;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
    }

    /// Power grid in dBm; `0, 2, ..., 40` unless configured.
    pub fn powers(&self) -> Result<Vec<f64>, ConfigIssue> {
        let g = &self.grid;
        if let Some(list) = &g.powers_dbm {
            if g.start.is_some() || g.stop.is_some() || g.step.is_some() {
                return Err(ConfigIssue::new("grid", "give either powers_dbm or start/stop/step, not both"));
            }
            return Ok(list.clone());
        }
        let start = g.start.unwrap_or(0.0);
        let stop = g.stop.unwrap_or(40.0);
        let step = g.step.unwrap_or(2.0);
        if !(step > 0.0 && step.is_finite()) {
            return Err(ConfigIssue::new("grid.step", "must be positive"));
        }
        if !(start.is_finite() && stop.is_finite() && stop >= start) {
            return Err(ConfigIssue::new("grid.stop", "must be finite and not below grid.start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    }

    /// Model parameters; invalid parts are reported and replaced by the
    /// reference values so the remaining checks still run.
    fn base_params(&self, issues: &mut Vec<ConfigIssue>) -> SystemParams {
        let s = &self.system;
        let reference = SystemParams::reference();
        let split = PowerSplit::new(s.weak_share, s.strong_share).unwrap_or_else(|e| {
            issues.push(ConfigIssue::new("system.weak_share", e.reason));
            reference.split
        });
        let rates = RateTargets::new(self.rates.weak, 1.0).unwrap_or_else(|e| {
            issues.push(ConfigIssue::new("rates.weak", e.reason));
            reference.rates
        });
        SystemParams {
            antennas: s.antennas,
            density: s.density,
            half_angle: s.half_angle,
            blockage: s.blockage,
            radius: s.radius,
            path_loss_exponent: s.path_loss_exponent,
            split,
            rates,
            noise_dbm: s.noise_dbm,
        }
    }

    /// Check every setting and expand the configuration into series.
    /// All violations are reported together.
    pub fn plan(&self) -> Result<Plan, ConfigError> {
        let mut issues = Vec::new();
        let powers = match self.powers() {
            Ok(p) if p.is_empty() => {
                issues.push(ConfigIssue::new("grid", "power grid is empty"));
                p
            }
            Ok(p) => {
                if p.iter().any(|x| !x.is_finite()) {
                    issues.push(ConfigIssue::new("grid.powers_dbm", "powers must be finite"));
                }
                p
            }
            Err(e) => {
                issues.push(e);
                Vec::new()
            }
        };
        if self.mode.monte_carlo() && self.trials == 0 {
            issues.push(ConfigIssue::new("trials", "Monte Carlo needs at least one trial"));
        }
        if self.scheme.is_empty() {
            issues.push(ConfigIssue::new("scheme", "at least one [[scheme]] entry is required"));
        }
        let strong_rates = self.rates.strong.to_vec();
        if strong_rates.is_empty() {
            issues.push(ConfigIssue::new("rates.strong", "at least one rate is required"));
        }
        let base = self.base_params(&mut issues);
        let mut counts: Vec<UserCount> = Vec::new();
        if self.users.poisson.unwrap_or(self.users.conditioned.is_empty()) {
            counts.push(UserCount::Poisson);
        }
        counts.extend(self.users.conditioned.iter().map(|&k| UserCount::Fixed(k)));
        if counts.is_empty() {
            issues.push(ConfigIssue::new("users", "no user-count law selected"));
        }

        let mut labels: Vec<String> = Vec::new();
        let mut series = Vec::new();
        for (n, section) in self.scheme.iter().enumerate() {
            let field = format!("scheme[{n}]");
            let label = section.label();
            if labels.contains(&label) {
                issues.push(ConfigIssue::new(format!("{field}.label"), format!("duplicate label {label:?}")));
            }
            labels.push(label.clone());
            let Some(scheme) = scheme_of(section, &field, &mut issues) else { continue };
            for &strong in &strong_rates {
                let rates = match RateTargets::new(base.rates.weak_rate(), strong) {
                    Ok(r) => r,
                    Err(e) => {
                        issues.push(ConfigIssue::new("rates.strong", e.reason));
                        continue;
                    }
                };
                for &users in &counts {
                    let experiment = Experiment {
                        scheme,
                        params: SystemParams { rates, ..base },
                        users,
                        single_user_rate: self.rates.single_user,
                    };
                    if let Err(errors) = experiment.validate() {
                        for e in errors {
                            let issue = ConfigIssue::new(config_field(e.field, &field), e.reason);
                            if !issues.contains(&issue) {
                                issues.push(issue);
                            }
                        }
                        continue;
                    }
                    series.push(Series { label: label.clone(), experiment });
                }
            }
        }
        if !issues.is_empty() {
            return Err(ConfigError::Invalid(issues));
        }
        Ok(Plan {
            name: self.name.clone().unwrap_or_else(|| "experiment".into()),
            mode: self.mode,
            trials: self.trials,
            seed: self.seed,
            out: self.out.clone(),
            powers_dbm: powers,
            series,
        })
    }
}

/// Map a model-level field name to its configuration key.
fn config_field(field: &str, scheme: &str) -> String {
    match field {
        "antennas" | "density" | "half_angle" | "blockage" | "radius" | "path_loss_exponent" | "noise_dbm" => {
            format!("system.{field}")
        }
        "split" => "system.weak_share".into(),
        "users" => "users.conditioned".into(),
        "single_user_rate" => "rates.single_user".into(),
        "threshold" => format!("{scheme}.threshold"),
        "beams" => format!("{scheme}.beams"),
        "scheme" => scheme.into(),
        other => other.into(),
    }
}

fn scheme_of(section: &SchemeSection, field: &str, issues: &mut Vec<ConfigIssue>) -> Option<Scheme> {
    match section {
        SchemeSection::PerfectCsi { weak, strong, fallback, .. } => {
            let strong = match strong {
                OrderSpec::Index(j) => UserOrder::Nth(*j),
                OrderSpec::Name(s) if s == "K" => UserOrder::Last,
                OrderSpec::Name(s) => {
                    issues.push(ConfigIssue::new(format!("{field}.strong"), format!("expected a number or \"K\", got {s:?}")));
                    return None;
                }
            };
            let fallback = match fallback {
                FallbackSpec::ZeroRate => PairFallback::ZeroRate,
                FallbackSpec::Clamp => PairFallback::ClampToAvailable,
            };
            Some(Scheme::PerfectCsi { weak: UserOrder::Nth(*weak), strong, fallback })
        }
        SchemeSection::DistanceOnly { weak, strong, .. } => Some(Scheme::DistanceOnly { weak: *weak, strong: *strong }),
        SchemeSection::OneBit { threshold, .. } => {
            let rule = match threshold {
                ThresholdSpec::Value(x) => ThresholdRule::Fixed(*x),
                ThresholdSpec::Name(s) if s == "midpoint" => ThresholdRule::Midpoint,
                ThresholdSpec::Name(s) if s == "eta-gap" => ThresholdRule::EtaGap,
                ThresholdSpec::Name(s) => {
                    issues.push(ConfigIssue::new(
                        format!("{field}.threshold"),
                        format!("expected a number, \"midpoint\" or \"eta-gap\", got {s:?}"),
                    ));
                    return None;
                }
            };
            Some(Scheme::OneBit { rule })
        }
        SchemeSection::MultiBeam { beams, weak, strong, .. } => {
            Some(Scheme::MultiBeam { beams: *beams, weak: *weak, strong: *strong })
        }
    }
}
