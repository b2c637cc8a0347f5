//! Bundled experiment configurations, one per published figure.

use crate::config::{ConfigError, ExperimentConfig};

pub struct Preset {
    pub name: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset { name: "fig1", text: include_str!("../presets/fig1.toml") },
    Preset { name: "fig1b", text: include_str!("../presets/fig1b.toml") },
    Preset { name: "fig2", text: include_str!("../presets/fig2.toml") },
    Preset { name: "fig3", text: include_str!("../presets/fig3.toml") },
    Preset { name: "fig5", text: include_str!("../presets/fig5.toml") },
    Preset { name: "fig6", text: include_str!("../presets/fig6.toml") },
    Preset { name: "fig7", text: include_str!("../presets/fig7.toml") },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn config(&self) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(self.text)
    }

    pub fn description(&self) -> String {
        self.config().ok().and_then(|c| c.description).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid_and_named_consistently() {
        for preset in PRESETS {
            let cfg = preset.config().unwrap_or_else(|e| panic!("{}: {e}", preset.name));
            assert_eq!(cfg.name.as_deref(), Some(preset.name));
            assert!(!preset.description().is_empty());
            cfg.plan().unwrap_or_else(|e| panic!("{}: {e}", preset.name));
        }
    }

    #[test]
    fn fig1_sweeps_two_strong_rates() {
        let plan = find("fig1").unwrap().config().unwrap().plan().unwrap();
        let rates: Vec<f64> = plan.series.iter().map(|s| s.experiment.params.rates.strong_rate()).collect();
        assert_eq!(rates, vec![4.0, 6.0]);
        assert_eq!(plan.powers_dbm.first(), Some(&0.0));
        assert_eq!(plan.powers_dbm.last(), Some(&40.0));
    }
}
