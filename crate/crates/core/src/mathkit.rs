//! Scalar special functions used across the toolkit.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::DomainError;

/// Below this value of `|sin(x/2)|` the Fejér kernel is replaced by its limit.
const KERNEL_SINGULARITY: f64 = 1e-9;

/// Fejér kernel `sin²(m·x/2) / (m·sin²(x/2))`.
///
/// This is the array gain of an `m`-element uniform linear array steered
/// `x/π` normalized-direction units away from the user. At `x ≡ 0 (mod 2π)`
/// the removable singularity is replaced by the limit `m`. The result is
/// clamped to `[0, m]` so rounding near the main lobe can never exceed the
/// peak.
pub fn fejer_kernel(x: f64, m: u32) -> f64 {
    let m = f64::from(m.max(1));
    let half = (0.5 * x).sin();
    if half.abs() < KERNEL_SINGULARITY {
        return m;
    }
    let num = (0.5 * m * x).sin();
    (num * num / (m * half * half)).clamp(0.0, m)
}

/// Second-order small-offset approximation `m·(1 − π²m²δ²/12)` of
/// `fejer_kernel(π·δ, m)`.
pub fn fejer_kernel_small_angle(offset: f64, m: u32) -> f64 {
    let m = f64::from(m.max(1));
    m * (1.0 - PI * PI * m * m * offset * offset / 12.0)
}

/// First derivative of the Fejér kernel with respect to `x`:
///
/// `sin(m·x)/(1 − cos x) − (1 − cos(m·x))·sin x / (m·(1 − cos x)²)`.
///
/// `1 − cos` is evaluated as `2·sin²(·/2)` to avoid cancellation near the
/// main lobe. The expression is undefined at `x ≡ 0 (mod 2π)`.
pub fn fejer_kernel_derivative(x: f64, m: u32) -> Result<f64, DomainError> {
    let half = (0.5 * x).sin();
    if half.abs() < KERNEL_SINGULARITY {
        return Err(DomainError::KernelSingularity { x });
    }
    let mf = f64::from(m.max(1));
    let one_minus_cos = 2.0 * half * half;
    let mhalf = (0.5 * mf * x).sin();
    let one_minus_cos_m = 2.0 * mhalf * mhalf;
    Ok((mf * x).sin() / one_minus_cos
        - one_minus_cos_m * x.sin() / (mf * one_minus_cos * one_minus_cos))
}

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

/// Lower incomplete gamma function `γ(s, x) = ∫₀ˣ t^{s−1} e^{−t} dt`.
///
/// Uses the power series for `x < s + 1` and the Lentz continued fraction for
/// the upper function otherwise.
pub fn lower_incomplete_gamma(s: f64, x: f64) -> f64 {
    debug_assert!(s > 0.0, "shape must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x < s + 1.0 {
        gamma_series(s, x)
    } else {
        (gamma(s) - upper_gamma_continued_fraction(s, x)).max(0.0)
    }
}

/// `x^s e^{−x} Σ_n x^n / (s(s+1)…(s+n))`, which is already unnormalized.
fn gamma_series(s: f64, x: f64) -> f64 {
    let mut ap = s;
    let mut term = 1.0 / s;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * (s * x.ln() - x).exp()
}

/// Upper incomplete gamma `Γ(s, x)` by modified Lentz evaluation.
fn upper_gamma_continued_fraction(s: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (s * x.ln() - x).exp() * h
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Poisson probability mass `μ^k e^{−μ} / k!`, evaluated in log space.
pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln = k as f64 * mean.ln() - mean - statrs::function::factorial::ln_factorial(k);
    ln.exp()
}

/// `P(X < k)` for `X ~ Poisson(mean)`.
pub fn poisson_cdf_below(k: u64, mean: f64) -> f64 {
    (0..k).map(|n| poisson_pmf(n, mean)).sum::<f64>().min(1.0)
}

/// `P(X ≥ k)` for `X ~ Poisson(mean)`, summed from the tail side when that
/// is the smaller quantity.
pub fn poisson_tail(k: u64, mean: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if (k as f64) > mean {
        let mut sum = 0.0;
        let mut n = k;
        loop {
            let p = poisson_pmf(n, mean);
            sum += p;
            if p < 1e-18 * sum.max(1e-300) || n > k + 10_000 {
                break;
            }
            n += 1;
        }
        sum.min(1.0)
    } else {
        (1.0 - poisson_cdf_below(k, mean)).max(0.0)
    }
}

/// Smallest `k_max` such that `P(X > k_max) < tail` for `X ~ Poisson(mean)`.
pub fn poisson_truncation(mean: f64, tail: f64) -> u64 {
    let mut k = 0;
    while poisson_tail(k + 1, mean) >= tail {
        k += 1;
    }
    k
}

/// Wrap a normalized direction onto `[−1, 1)`.
pub fn wrap_direction(x: f64) -> f64 {
    if (-1.0..1.0).contains(&x) {
        return x;
    }
    (x + 1.0).rem_euclid(2.0) - 1.0
}
