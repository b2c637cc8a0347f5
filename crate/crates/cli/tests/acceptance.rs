//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits with a failure status if any criterion fails.
//!
//! Run with `cargo test -p mmnoma-cli --test acceptance`.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mmwave_noma::analytic::{
    alternating_sum_outage, conditional_outage, distance_conditional_outage, distance_scheme_outage,
    multibeam_conditional_outage, multibeam_outage, noma_sum_rate, oma_sum_rate, onebit_conditional_cdfs,
    onebit_outage, onebit_set_pmf, order_statistic_cdf, Access, GainDistribution, OrderStatMethod, Role,
    SectorQuadrature, SumRateOptions, ThresholdRule,
};
use mmwave_noma::geometry::{ordered_distance_cdf, sample_user_count, sample_users, user_count_pmf};
use mmwave_noma::mathkit::{fejer_kernel, fejer_kernel_derivative};
use mmwave_noma::params::{PairFallback, SystemParams, UserOrder};
use mmwave_noma::sim::{run_experiment, sweep, Experiment, OutageCount, Scheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn grid(start: u32, stop: u32, step: usize) -> Vec<f64> {
    (start..=stop).step_by(step).map(f64::from).collect()
}

/// Least-squares slope of `log10 y` against `log10 ρ = dBm / 10`.
fn loglog_slope(powers_dbm: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = powers_dbm.iter().map(|p| p / 10.0).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.log10()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Largest `|mc − analytic| / σ` over a sweep, with `σ` floored by the
/// binomial standard error at the analytic value.
fn worst_z(points: &[(&OutageCount, f64)]) -> f64 {
    points
        .iter()
        .map(|(mc, a)| {
            let n = mc.eligible() as f64;
            let sigma = mc.conditional_stderr().max((a * (1.0 - a) / n).sqrt());
            let diff = (mc.conditional() - a).abs();
            if diff == 0.0 { 0.0 } else { diff / sigma }
        })
        .fold(0.0, f64::max)
}

fn c1_perfect_csi_matches_simulation() -> Outcome {
    let start = Instant::now();
    let p = SystemParams::reference();
    let exp = Experiment::new(
        Scheme::PerfectCsi { weak: UserOrder::Nth(1), strong: UserOrder::Last, fallback: PairFallback::ZeroRate },
        p,
    )
    .conditioned_on(5);
    let dist = GainDistribution::new(p);
    let powers = grid(10, 40, 2);
    let mc = sweep(&exp, &powers, 100_000, 1);
    let mut pairs = Vec::new();
    for (agg, &dbm) in mc.points.iter().zip(&powers) {
        let rho = p.rho(dbm);
        pairs.push((&agg.weak, conditional_outage(&dist, Role::Weak, 1, 5, rho)?));
        pairs.push((&agg.strong, conditional_outage(&dist, Role::Strong, 5, 5, rho)?));
    }
    let z = worst_z(&pairs);
    let elapsed = start.elapsed();
    Ok((
        z <= 3.0 && elapsed < Duration::from_secs(300),
        format!("worst |z| = {z:.2} over {} points, {elapsed:.1?}", pairs.len()),
    ))
}

fn c2_diversity_order() -> Outcome {
    let p = SystemParams::reference();
    let dist = GainDistribution::new(p);
    let powers = grid(30, 50, 2);
    let mut ok = true;
    let mut detail = Vec::new();
    for i in 1..=3usize {
        let values = powers
            .iter()
            .map(|&d| conditional_outage(&dist, Role::Weak, i, 5, p.rho(d)))
            .collect::<Result<Vec<_>, _>>()?;
        let slope = loglog_slope(&powers, &values);
        ok &= (slope + i as f64).abs() <= 0.3;
        detail.push(format!("i={i}: {slope:.3}"));
    }
    Ok((ok, detail.join(", ")))
}

fn c3_distance_scheme() -> Outcome {
    let p = SystemParams::reference();
    let quad = SectorQuadrature::new(p);
    let exp = Experiment::new(Scheme::DistanceOnly { weak: 4, strong: 1 }, p);
    let powers = grid(10, 40, 2);
    let mc = sweep(&exp, &powers, 100_000, 2);
    let mut pairs = Vec::new();
    for (agg, &dbm) in mc.points.iter().zip(&powers) {
        let rho = p.rho(dbm);
        pairs.push((&agg.weak, distance_conditional_outage(&quad, Role::Weak, 4, rho)?));
        pairs.push((&agg.strong, distance_conditional_outage(&quad, Role::Strong, 1, rho)?));
    }
    let z = worst_z(&pairs);
    let high = grid(30, 50, 2);
    let mut ok = z <= 3.0;
    let mut detail = vec![format!("worst |z| = {z:.2}")];
    for (role, k) in [(Role::Weak, 4), (Role::Strong, 1)] {
        let values = high
            .iter()
            .map(|&d| distance_conditional_outage(&quad, role, k, p.rho(d)))
            .collect::<Result<Vec<_>, _>>()?;
        let slope = loglog_slope(&high, &values);
        ok &= (slope + 1.0).abs() <= 0.3;
        detail.push(format!("k={k} slope {slope:.3}"));
    }
    Ok((ok, detail.join(", ")))
}

fn c4_onebit_diversity() -> Outcome {
    let p = SystemParams::reference().with_rates(1.5, 4.0);
    let dist = GainDistribution::new(p);
    let powers = grid(30, 50, 2);
    let slope = |role, k, rule| -> Result<f64, Box<dyn std::error::Error>> {
        let values = powers
            .iter()
            .map(|&d| onebit_outage(&dist, role, k, rule, p.rho(d), Access::Noma))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(loglog_slope(&powers, &values))
    };
    let mut ok = true;
    let mut detail = Vec::new();
    let mut strong = Vec::new();
    for k in [2usize, 3] {
        let s = slope(Role::Strong, k, ThresholdRule::EtaGap)?;
        ok &= (s + k as f64).abs() <= 0.4;
        strong.push(s);
        detail.push(format!("strong K={k}: {s:.3}"));
        for (name, rule) in [("eta-gap", ThresholdRule::EtaGap), ("midpoint", ThresholdRule::Midpoint)] {
            let w = slope(Role::Weak, k, rule)?;
            ok &= (w + 1.0).abs() <= 0.3;
            detail.push(format!("weak K={k} {name}: {w:.3}"));
        }
    }
    let gap = strong[0] - strong[1];
    ok &= (gap - 1.0).abs() <= 0.4;
    detail.push(format!("strong slope gap {gap:.3}"));
    Ok((ok, detail.join(", ")))
}

fn c5_multibeam() -> Outcome {
    let reference = SystemParams::reference();
    let quad = SectorQuadrature::new(reference);
    let mut worst = 0.0f64;
    for dbm in [0.0, 15.0, 30.0, 45.0] {
        let rho = reference.rho(dbm);
        for (role, k) in [(Role::Weak, 4), (Role::Strong, 1)] {
            let a = multibeam_outage(&quad, role, k, 1, rho)?;
            let b = distance_scheme_outage(&quad, role, k, rho)?;
            worst = worst.max((a - b).abs());
        }
    }
    let rhos: Vec<f64> = [10.0, 30.0].iter().map(|&d| reference.rho(d)).collect();
    let single = Experiment::new(Scheme::MultiBeam { beams: 1, weak: 4, strong: 1 }, reference);
    let distance = Experiment::new(Scheme::DistanceOnly { weak: 4, strong: 1 }, reference);
    let mc_equal = run_experiment(&single, &rhos, 20_000, 5) == run_experiment(&distance, &rhos, 20_000, 5);

    let p = SystemParams { antennas: 8, density: 10.0, half_angle: 0.01, ..reference }.with_rates(0.5, 5.0);
    let quad = SectorQuadrature::new(p);
    let at = |dbm: f64, access| multibeam_conditional_outage(&quad, Role::Strong, 1, 4, p.rho(dbm), access);
    let (oma35, oma45) = (at(35.0, Access::Oma)?, at(45.0, Access::Oma)?);
    let (noma35, noma45) = (at(35.0, Access::Noma)?, at(45.0, Access::Noma)?);
    let oma_drop = (oma35 - oma45) / oma35;
    let floors = oma_drop <= 1e-2;
    let noma_decreasing = noma45 < noma35 && (noma35 - noma45) / noma35 > 1e-2;
    Ok((
        worst <= 1e-8 && mc_equal && floors && noma_decreasing,
        format!(
            "N=1 max diff {worst:.1e}, MC identical {mc_equal}; OMA strong {oma35:.5} -> {oma45:.5} \
             (relative drop {:.2}%), NOMA strong {noma35:.3e} -> {noma45:.3e}",
            100.0 * oma_drop
        ),
    ))
}

fn c6_noma_gain() -> Outcome {
    let opts = SumRateOptions::default();
    let gain = |strong_rate| -> Result<(f64, f64), Box<dyn std::error::Error>> {
        let p = SystemParams::reference().with_rates(0.5, strong_rate);
        let dist = GainDistribution::new(p);
        let rho = p.rho(30.0);
        let noma = noma_sum_rate(&dist, UserOrder::Nth(1), UserOrder::Last, rho, opts)?;
        let oma = oma_sum_rate(&dist, UserOrder::Nth(1), UserOrder::Last, rho, opts)?;
        Ok((noma, noma - oma))
    };
    let (noma4, g4) = gain(4.0)?;
    let (noma6, g6) = gain(6.0)?;
    Ok((
        g4 > 0.0 && g6 > g4,
        format!("R_strong=4: NOMA {noma4:.4}, gain {g4:.3e}; R_strong=6: NOMA {noma6:.4}, gain {g6:.3e} BPCU"),
    ))
}

fn ks_distance(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

fn c7_property_suites() -> Outcome {
    let start = Instant::now();
    let p = SystemParams::reference();
    let (region, dep) = (p.region(), p.deployment());
    let drops = 100_000usize;

    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut counts = vec![0u64; 64];
    for _ in 0..drops {
        counts[sample_user_count(&region, &dep, &mut rng).min(63)] += 1;
    }
    let expected = |k: usize| drops as f64 * user_count_pmf(k as u64, &region, &dep);
    let last = (0..).find(|&k| k > 5 && expected(k + 1) < 5.0).unwrap();
    let mut chi2 = 0.0;
    let mut rest = drops as f64;
    for k in 0..last {
        chi2 += (counts[k] as f64 - expected(k)).powi(2) / expected(k);
        rest -= expected(k);
    }
    chi2 += (counts[last..].iter().sum::<u64>() as f64 - rest).powi(2) / rest;
    let critical = ChiSquared::new(last as f64)?.inverse_cdf(0.99);

    let mut ks_worst = 0.0f64;
    for k in 1..=3u32 {
        let mut rng = ChaCha8Rng::seed_from_u64(70 + u64::from(k));
        let mut samples = Vec::new();
        for _ in 0..drops {
            let mut d: Vec<f64> = sample_users(&region, &dep, &mut rng).iter().map(|u| u.distance).collect();
            if d.len() >= k as usize {
                d.sort_by(f64::total_cmp);
                samples.push(d[k as usize - 1]);
            }
        }
        let exists = ordered_distance_cdf(k, p.radius, &region, &dep);
        ks_worst = ks_worst.max(ks_distance(samples, |r| ordered_distance_cdf(k, r, &region, &dep) / exists));
    }

    let mut alt_worst = 0.0f64;
    for k in 1..=8 {
        for i in 1..=k {
            for step in 0..=50 {
                let f = step as f64 / 50.0;
                let exact = order_statistic_cdf(i, k, f, OrderStatMethod::IncompleteBeta);
                alt_worst = alt_worst.max((alternating_sum_outage(i, k, f) - exact).abs());
            }
        }
    }

    let dist = GainDistribution::new(p.with_rates(1.5, 4.0));
    let mut total_worst = 0.0f64;
    for xi in [0.005, 0.02, 0.05, 0.3] {
        for k in 1..=6 {
            let total: f64 = (0..=k).map(|n| onebit_set_pmf(&dist, n, k, xi)).sum::<Result<f64, _>>()?;
            total_worst = total_worst.max((total - 1.0).abs());
        }
        let below = dist.cdf(xi)?;
        for y in [1e-4, 1e-3, 0.01, 0.04, 0.1, 1.0] {
            let (f1, f2) = onebit_conditional_cdfs(&dist, y, xi)?;
            total_worst = total_worst.max((below * f1 + (1.0 - below) * f2 - dist.cdf(y)?).abs());
        }
    }

    let mut fd_worst = 0.0f64;
    for m in [2u32, 4, 8, 16] {
        for step in 1..100 {
            let x = 2.0 * PI * step as f64 / 100.0;
            let h = 1e-6;
            let fd = (fejer_kernel(x + h, m) - fejer_kernel(x - h, m)) / (2.0 * h);
            fd_worst = fd_worst.max((fejer_kernel_derivative(x, m)? - fd).abs());
        }
    }

    let elapsed = start.elapsed();
    Ok((
        chi2 < critical
            && ks_worst < 0.015
            && alt_worst <= 1e-10
            && total_worst <= 1e-10
            && fd_worst <= 1e-6
            && elapsed < Duration::from_secs(120),
        format!(
            "chi2 {chi2:.2} < {critical:.2}, KS {ks_worst:.4}, alternating {alt_worst:.1e}, \
             total probability {total_worst:.1e}, derivative {fd_worst:.1e}, {elapsed:.1?}"
        ),
    ))
}

fn c8_schedule_independence() -> Outcome {
    let csv = |preset: &str, threads: &str, trials: Option<&str>| -> Result<Vec<u8>, Box<dyn std::error::Error>> {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mmnoma"));
        cmd.args(["run", "--preset", preset]).env("RAYON_NUM_THREADS", threads);
        if let Some(t) = trials {
            cmd.args(["--trials", t]);
        }
        let out = cmd.output()?;
        if !out.status.success() {
            return Err(String::from_utf8_lossy(&out.stderr).into_owned().into());
        }
        Ok(out.stdout)
    };
    let mut checked = Vec::new();
    for (preset, trials) in
        [("fig1", None), ("fig2", None), ("fig3", None), ("fig5", None), ("fig6", None), ("fig7", Some("500"))]
    {
        let one = csv(preset, "1", trials)?;
        let four = csv(preset, "4", trials)?;
        if one != four {
            return Ok((false, format!("{preset} differs between 1 and 4 threads")));
        }
        checked.push(format!("{preset} ({} bytes)", one.len()));
    }
    Ok((true, format!("identical at 1 and 4 threads: {}", checked.join(", "))))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("perfect CSI, K = 5: simulation within 3 sigma of analysis", c1_perfect_csi_matches_simulation),
        ("perfect CSI, K = 5: outage slopes -i for i = 1, 2, 3", c2_diversity_order),
        ("distance ordering: simulation agreement and unit diversity", c3_distance_scheme),
        ("one-bit feedback: strong slope -K, weak slope -1", c4_onebit_diversity),
        ("multi-beam: single-beam reduction and OMA floor", c5_multibeam),
        ("NOMA sum-rate gain over OMA grows with R_strong", c6_noma_gain),
        ("property suites", c7_property_suites),
        ("CSV independent of thread count", c8_schedule_independence),
    ];
    let mut failures = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(result) => result,
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!("{} C{}: {name}: {detail}", if pass { "PASS" } else { "FAIL" }, n + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
