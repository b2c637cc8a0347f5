//! Configuration diagnostics.

use mmwave_noma::analytic::POISSON_TRUNCATION_TAIL;
use mmwave_noma::mathkit::poisson_truncation;
use mmwave_noma::noma::eta_thresholds;

use crate::config::{ConfigError, ExperimentConfig, Plan};

/// Derived quantities of a valid configuration, one line each.
pub fn report(plan: &Plan) -> Vec<String> {
    let mut lines = vec![format!(
        "{}: {} series, {} grid points, mode {:?}, {} trials, seed {}",
        plan.name,
        plan.series.len(),
        plan.powers_dbm.len(),
        plan.mode,
        plan.trials,
        plan.seed
    )];
    let mut seen = Vec::new();
    for series in &plan.series {
        let p = series.experiment.params;
        if seen.contains(&p) {
            continue;
        }
        seen.push(p);
        let mu = p.mean_users();
        lines.push(format!(
            "R_weak={} R_strong={}: mu={:.5} K_max={}",
            p.rates.weak_rate(),
            p.rates.strong_rate(),
            mu,
            poisson_truncation(mu, POISSON_TRUNCATION_TAIL)
        ));
        for &power in &plan.powers_dbm {
            let rho = p.rho(power);
            let eta = match eta_thresholds(&p.split, &p.rates, rho) {
                Some(e) => format!("eta_weak={:e} eta_strong={:e}", e.weak, e.strong),
                None => "NOMA infeasible".to_string(),
            };
            lines.push(format!("  {power} dBm: rho={rho:e} {eta}"));
        }
    }
    lines
}

/// Check a configuration; on success return the diagnostic report.
pub fn validate(config: &ExperimentConfig) -> Result<Vec<String>, ConfigError> {
    config.plan().map(|plan| report(&plan))
}
