use thiserror::Error;

/// A scalar function was evaluated outside its domain.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DomainError {
    #[error("Fejér kernel derivative is undefined at x = {x} (multiple of 2π)")]
    KernelSingularity { x: f64 },
}

/// Adaptive quadrature stopped before reaching the requested tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
pub struct QuadratureError {
    pub achieved: f64,
    pub requested: f64,
}

/// A model parameter violates its invariant.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {reason}")]
pub struct ParamError {
    pub field: &'static str,
    pub reason: String,
}

impl ParamError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self { field, reason: reason.into() }
    }
}

/// Errors surfaced by the analytic evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("power split is infeasible for the requested rates: {0}")]
    Infeasible(String),
}
