//! Adaptive Gauss–Legendre quadrature.
//!
//! A fixed `n`-point rule is applied per panel; the panel whose halves
//! disagree most with the whole is bisected until the summed disagreement
//! meets the tolerance. Two-dimensional
//! integrals in [`crate::analytic`] nest two of these integrators.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::QuadratureError;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, refined by Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Apply the rule on `[a, b]`.
    pub fn panel<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, f: &mut F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tolerances and rule size for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub order: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { order: 16, abs_tol: 1e-13, rel_tol: 1e-11, max_depth: 36 }
    }
}

impl QuadratureConfig {
    /// Same tolerances with twice the nodes per panel.
    pub fn doubled(self) -> Self {
        Self { order: self.order * 2, ..self }
    }
}

/// An integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Adaptive bisection integrator over a fixed Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct Integrator {
    rule: GaussLegendre,
    config: QuadratureConfig,
}

impl Integrator {
    pub fn new(config: QuadratureConfig) -> Self {
        Self { rule: GaussLegendre::new(config.order), config }
    }

    pub fn config(&self) -> QuadratureConfig {
        self.config
    }

    /// `∫_a^b f`, or an error carrying the achieved accuracy.
    pub fn integrate<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
    ) -> Result<Estimate, QuadratureError> {
        self.integrate_pieces(&mut f, &[a, b])
    }

    /// Integrate over consecutive intervals `[p₀,p₁], [p₁,p₂], …`, so that
    /// known kinks of the integrand fall on panel edges.
    pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        points: &[f64],
    ) -> Result<Estimate, QuadratureError> {
        self.integrate_pieces(&mut f, points)
    }

    fn integrate_pieces<F: FnMut(f64) -> f64>(
        &self,
        f: &mut F,
        points: &[f64],
    ) -> Result<Estimate, QuadratureError> {
        // Global refinement: always bisect the panel with the largest error.
        let mut active = BinaryHeap::new();
        let mut settled = Vec::new();
        for w in points.windows(2) {
            let whole = self.rule.panel(w[0], w[1], f);
            let panel = self.split(f, w[0], w[1], whole, 0);
            if panel.converged(self.config.max_depth) {
                settled.push(panel);
            } else {
                active.push(panel);
            }
        }
        let sum = |active: &BinaryHeap<Panel>, settled: &[Panel]| -> Estimate {
            let mut est = Estimate::default();
            for p in settled.iter().chain(active.iter()) {
                est.value += p.value;
                est.error += p.error;
            }
            est
        };
        let mut total = sum(&active, &settled);
        let mut steps = 0u32;
        while let Some(worst) = active.pop() {
            let tol = self.config.abs_tol.max(self.config.rel_tol * total.value.abs());
            if total.error <= tol {
                active.push(worst);
                break;
            }
            let mid = 0.5 * (worst.a + worst.b);
            let left = self.split(f, worst.a, mid, worst.left, worst.depth + 1);
            let right = self.split(f, mid, worst.b, worst.right, worst.depth + 1);
            total.value += left.value + right.value - worst.value;
            total.error += left.error + right.error - worst.error;
            for child in [left, right] {
                if child.converged(self.config.max_depth) {
                    settled.push(child);
                } else {
                    active.push(child);
                }
            }
            steps += 1;
            if steps % 256 == 0 {
                total = sum(&active, &settled);
            }
        }
        let total = sum(&active, &settled);
        let tol = self.config.abs_tol.max(self.config.rel_tol * total.value.abs());
        if total.error > tol && total.error > 64.0 * f64::EPSILON * total.value.abs() {
            return Err(QuadratureError { achieved: total.error, requested: tol });
        }
        Ok(total)
    }

    fn split<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64, whole: f64, depth: u32) -> Panel {
        let mid = 0.5 * (a + b);
        let left = self.rule.panel(a, mid, f);
        let right = self.rule.panel(mid, b, f);
        let value = left + right;
        let floor = 32.0 * f64::EPSILON * (left.abs() + right.abs());
        let diff = (value - whole).abs();
        Panel { a, b, left, right, value, error: if diff <= floor { 0.0 } else { diff }, depth }
    }
}

/// A bisected panel: both halves and the error of their sum against the
/// undivided rule.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl Panel {
    fn converged(&self, max_depth: u32) -> bool {
        self.error == 0.0 || self.depth >= max_depth
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(QuadratureConfig::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(5);
        let wsum: f64 = rule.weights().iter().sum();
        assert_abs_diff_eq!(wsum, 2.0, epsilon = 1e-14);
        // degree 9 is the highest exact degree for 5 nodes
        let v = rule.panel(0.0, 2.0, &mut |x: f64| x.powi(9));
        assert_abs_diff_eq!(v, 2f64.powi(10) / 10.0, epsilon = 1e-10);
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        for n in [1, 2, 7, 16, 32] {
            let rule = GaussLegendre::new(n);
            let x = rule.nodes();
            for i in 0..n {
                assert_abs_diff_eq!(x[i], -x[n - 1 - i], epsilon = 1e-15);
            }
            assert!(x.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let integ = Integrator::default();
        let est = integ.integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0).unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((est.value - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn breaks_match_single_interval() {
        let integ = Integrator::default();
        let a = integ.integrate(|x: f64| x.sin().abs(), 0.0, 6.0).unwrap();
        let b = integ.integrate_with_breaks(|x: f64| x.sin().abs(), &[0.0, PI, 6.0]).unwrap();
        let exact = 3.0 + 6f64.cos();
        assert_abs_diff_eq!(b.value, exact, epsilon = 1e-12);
        assert_abs_diff_eq!(a.value, exact, epsilon = 1e-9);
    }

    #[test]
    fn non_convergence_is_reported() {
        let integ = Integrator::new(QuadratureConfig { order: 2, max_depth: 2, ..Default::default() });
        let err = integ.integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0).unwrap_err();
        assert!(err.achieved > err.requested);
    }
}
