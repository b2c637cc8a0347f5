//! Analytic and Monte Carlo evaluation of a plan.

use mmwave_noma::analytic::{
    conditional_oma_outage, conditional_outage, distance_conditional_oma_outage, distance_conditional_outage,
    distance_outage_given_users, distance_sum_rate, distance_sum_rate_given_users, multibeam_conditional_outage,
    multibeam_outage_given_users, multibeam_sum_rate, multibeam_sum_rate_given_users, noma_sum_rate, oma_sum_rate,
    onebit_outage, onebit_sum_rate, onebit_sum_rate_given_users, sum_rate_given_users, Access, GainDistribution,
    MissingWeakRule, Role, SectorQuadrature, SumRateOptions,
};
use mmwave_noma::error::QuadratureError;
use mmwave_noma::noma::oma_rate_threshold;
use mmwave_noma::params::resolve_gain_pair;
use mmwave_noma::sim::{sweep, Aggregate, Experiment, Scheme, UserCount};

use crate::config::{Plan, Series};
use crate::table::{Provenance, Quantity, Row, SweepTable};

#[derive(Debug, thiserror::Error)]
#[error("{metric} at {power_dbm} dBm: {source}")]
pub struct RunError {
    pub metric: String,
    pub power_dbm: f64,
    #[source]
    pub source: QuadratureError,
}

/// Quantities reported for a series.
pub fn quantities(exp: &Experiment) -> Vec<Quantity> {
    use Quantity::*;
    let rates = vec![NomaSumRate, OmaSumRate];
    let all = Quantity::ALL.to_vec();
    match (exp.scheme, exp.users) {
        (Scheme::PerfectCsi { .. } | Scheme::OneBit { .. }, UserCount::Poisson) => rates,
        (Scheme::PerfectCsi { weak, strong, fallback }, UserCount::Fixed(k)) => {
            if resolve_gain_pair(weak, strong, k, fallback).is_some() { all } else { rates }
        }
        (Scheme::OneBit { .. }, UserCount::Fixed(k)) => {
            if k >= 2 { all } else { rates }
        }
        (Scheme::DistanceOnly { .. } | Scheme::MultiBeam { .. }, UserCount::Poisson) => all,
        (Scheme::DistanceOnly { weak, strong } | Scheme::MultiBeam { weak, strong, .. }, UserCount::Fixed(n)) => {
            let mut q = Vec::new();
            if n >= strong as usize {
                q.push(StrongOutage);
            }
            if n >= weak as usize {
                q.insert(0, WeakOutage);
                q.push(WeakOmaOutage);
            }
            if n >= strong as usize {
                q.push(StrongOmaOutage);
            }
            q.extend(rates);
            q
        }
    }
}

fn access(q: Quantity) -> Access {
    match q {
        Quantity::WeakOutage | Quantity::StrongOutage | Quantity::NomaSumRate => Access::Noma,
        _ => Access::Oma,
    }
}

fn role(q: Quantity) -> Role {
    match q {
        Quantity::WeakOutage | Quantity::WeakOmaOutage => Role::Weak,
        _ => Role::Strong,
    }
}

/// Analytic evaluator of one series.
pub struct AnalyticModel {
    exp: Experiment,
    dist: GainDistribution,
    quad: SectorQuadrature,
}

impl AnalyticModel {
    pub fn new(exp: Experiment) -> Self {
        Self { exp, dist: GainDistribution::new(exp.params), quad: SectorQuadrature::new(exp.params) }
    }

    fn lone_rate(&self, rho: f64) -> Result<f64, QuadratureError> {
        let rate = self.exp.single_user_rate.unwrap_or(self.exp.params.rates.weak_rate());
        Ok(rate * (1.0 - self.dist.cdf(oma_rate_threshold(rate) / rho)?))
    }

    /// Value of `q` at SNR `rho`.
    pub fn value(&self, q: Quantity, rho: f64) -> Result<f64, QuadratureError> {
        let exp = &self.exp;
        let rates = exp.params.rates;
        let target = match role(q) {
            Role::Weak => rates.weak_rate(),
            Role::Strong => rates.strong_rate(),
        };
        let opts = SumRateOptions {
            single_user_rate: exp.single_user_rate,
            ..SumRateOptions::default()
        };
        match (exp.scheme, exp.users) {
            (Scheme::PerfectCsi { weak, strong, fallback }, users) => {
                let opts = SumRateOptions { fallback, ..opts };
                match (q, users) {
                    (Quantity::NomaSumRate, UserCount::Poisson) => noma_sum_rate(&self.dist, weak, strong, rho, opts),
                    (Quantity::OmaSumRate, UserCount::Poisson) => oma_sum_rate(&self.dist, weak, strong, rho, opts),
                    (Quantity::NomaSumRate | Quantity::OmaSumRate, UserCount::Fixed(k)) => {
                        sum_rate_given_users(&self.dist, weak, strong, k, rho, opts, access(q))
                    }
                    (_, UserCount::Fixed(k)) => {
                        let (i, j) = resolve_gain_pair(weak, strong, k, fallback).expect("pair checked by quantities()");
                        let index = if role(q) == Role::Weak { i } else { j };
                        match access(q) {
                            Access::Noma => conditional_outage(&self.dist, role(q), index, k, rho),
                            Access::Oma => conditional_oma_outage(&self.dist, index, k, target, rho),
                        }
                    }
                    (_, UserCount::Poisson) => unreachable!("no outage metrics for a Poisson perfect-CSI series"),
                }
            }
            (Scheme::OneBit { rule }, UserCount::Poisson) => {
                onebit_sum_rate(&self.dist, rule, rho, exp.single_user_rate, access(q))
            }
            (Scheme::OneBit { rule }, UserCount::Fixed(k)) => match (q.is_outage(), k) {
                (true, _) => onebit_outage(&self.dist, role(q), k, rule, rho, access(q)),
                (false, 0) => Ok(0.0),
                (false, 1) => self.lone_rate(rho),
                (false, _) => onebit_sum_rate_given_users(&self.dist, k, rule, rho, access(q)),
            },
            (Scheme::DistanceOnly { weak, strong }, users) => {
                let k = if role(q) == Role::Weak { weak } else { strong };
                match (q, users) {
                    (Quantity::NomaSumRate | Quantity::OmaSumRate, UserCount::Poisson) => {
                        distance_sum_rate(&self.quad, weak, strong, rho, access(q), MissingWeakRule::NoTransmission)
                    }
                    (Quantity::NomaSumRate | Quantity::OmaSumRate, UserCount::Fixed(n)) => {
                        distance_sum_rate_given_users(&self.quad, weak, strong, n as u32, rho, access(q))
                    }
                    (_, UserCount::Poisson) => match access(q) {
                        Access::Noma => distance_conditional_outage(&self.quad, role(q), k, rho),
                        Access::Oma => distance_conditional_oma_outage(&self.quad, k, target, rho),
                    },
                    (_, UserCount::Fixed(n)) => {
                        distance_outage_given_users(&self.quad, role(q), k, n as u32, rho, access(q))
                    }
                }
            }
            (Scheme::MultiBeam { beams, weak, strong }, users) => {
                let k = if role(q) == Role::Weak { weak } else { strong };
                match (q, users) {
                    (Quantity::NomaSumRate | Quantity::OmaSumRate, UserCount::Poisson) => multibeam_sum_rate(
                        &self.quad,
                        weak,
                        strong,
                        beams,
                        rho,
                        access(q),
                        MissingWeakRule::NoTransmission,
                    ),
                    (Quantity::NomaSumRate | Quantity::OmaSumRate, UserCount::Fixed(n)) => {
                        multibeam_sum_rate_given_users(&self.quad, weak, strong, n as u32, beams, rho, access(q))
                    }
                    (_, UserCount::Poisson) => {
                        multibeam_conditional_outage(&self.quad, role(q), k, beams, rho, access(q))
                    }
                    (_, UserCount::Fixed(n)) => {
                        multibeam_outage_given_users(&self.quad, role(q), k, n as u32, beams, rho, access(q))
                    }
                }
            }
        }
    }
}

/// Monte Carlo estimate of `q` and its standard error.
pub fn mc_value(q: Quantity, agg: &Aggregate) -> (f64, f64) {
    let count = match q {
        Quantity::WeakOutage => &agg.weak,
        Quantity::StrongOutage => &agg.strong,
        Quantity::WeakOmaOutage => &agg.weak_oma,
        Quantity::StrongOmaOutage => &agg.strong_oma,
        Quantity::NomaSumRate => return (agg.noma_rate.mean(), agg.noma_rate.stderr()),
        Quantity::OmaSumRate => return (agg.oma_rate.mean(), agg.oma_rate.stderr()),
    };
    (count.conditional(), count.conditional_stderr())
}

struct Evaluated {
    metrics: Vec<(Quantity, String)>,
    analytic: Option<Vec<Vec<f64>>>,
    mc: Option<Vec<Aggregate>>,
}

fn evaluate_series(plan: &Plan, series: &Series) -> Result<Evaluated, RunError> {
    let exp = series.experiment;
    let metrics: Vec<(Quantity, String)> = quantities(&exp)
        .into_iter()
        .map(|q| (q, format!("{}.{}{}", series.label, q.name(), series.qualifier())))
        .collect();
    let analytic = if plan.mode.analytic() {
        let model = AnalyticModel::new(exp);
        let mut grid = Vec::with_capacity(plan.powers_dbm.len());
        for &power in &plan.powers_dbm {
            let rho = exp.params.rho(power);
            let values = metrics
                .iter()
                .map(|(q, name)| {
                    model.value(*q, rho).map_err(|source| RunError { metric: name.clone(), power_dbm: power, source })
                })
                .collect::<Result<Vec<_>, _>>()?;
            grid.push(values);
        }
        Some(grid)
    } else {
        None
    };
    let mc = plan.mode.monte_carlo().then(|| sweep(&exp, &plan.powers_dbm, plan.trials, plan.seed).points);
    Ok(Evaluated { metrics, analytic, mc })
}

/// Evaluate every series of `plan`. Rows are ordered by grid point, then
/// series and metric, with the analytic row before the Monte Carlo row.
pub fn run(plan: &Plan) -> Result<SweepTable, RunError> {
    let evaluated = plan.series.iter().map(|s| evaluate_series(plan, s)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (g, &power_dbm) in plan.powers_dbm.iter().enumerate() {
        for ev in &evaluated {
            for (m, (q, name)) in ev.metrics.iter().enumerate() {
                if let Some(a) = &ev.analytic {
                    rows.push(Row {
                        power_dbm,
                        metric: name.clone(),
                        unit: q.unit(),
                        value: a[g][m],
                        stderr: None,
                        provenance: Provenance::Analytic,
                    });
                }
                if let Some(mc) = &ev.mc {
                    let (value, stderr) = mc_value(*q, &mc[g]);
                    rows.push(Row {
                        power_dbm,
                        metric: name.clone(),
                        unit: q.unit(),
                        value,
                        stderr: Some(stderr),
                        provenance: Provenance::MonteCarlo,
                    });
                }
            }
        }
    }
    Ok(SweepTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn rows_follow_grid_then_metric_then_provenance() {
        let text = r#"
            trials = 200
            [grid]
            powers_dbm = [10.0, 20.0]
            [[scheme]]
            kind = "perfect-csi"
        "#;
        let plan = ExperimentConfig::parse(text).unwrap().plan().unwrap();
        let table = run(&plan).unwrap();
        let keys: Vec<(f64, &str, &str)> =
            table.rows.iter().map(|r| (r.power_dbm, r.metric.as_str(), r.provenance.as_str())).collect();
        let noma = "csi.noma_sum_rate[R_strong=6;K=poisson]";
        let oma = "csi.oma_sum_rate[R_strong=6;K=poisson]";
        assert_eq!(
            keys,
            vec![
                (10.0, noma, "analytic"),
                (10.0, noma, "mc"),
                (10.0, oma, "analytic"),
                (10.0, oma, "mc"),
                (20.0, noma, "analytic"),
                (20.0, noma, "mc"),
                (20.0, oma, "analytic"),
                (20.0, oma, "mc"),
            ]
        );
    }

    #[test]
    fn distance_counts_skip_missing_orders() {
        let text = r#"
            [users]
            conditioned = [2]
            [[scheme]]
            kind = "distance-only"
            weak = 3
            strong = 1
        "#;
        let plan = ExperimentConfig::parse(text).unwrap().plan().unwrap();
        let q = quantities(&plan.series[0].experiment);
        assert_eq!(q, vec![Quantity::StrongOutage, Quantity::StrongOmaOutage, Quantity::NomaSumRate, Quantity::OmaSumRate]);
    }
}
