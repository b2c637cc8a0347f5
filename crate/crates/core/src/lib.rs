//! Random-beamforming millimeter-wave NOMA: deployment geometry, channel
//! model, NOMA decoding rules, analytic performance expressions and a
//! deterministic parallel Monte Carlo engine.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod mathkit;
pub mod noma;
pub mod params;
pub mod quadrature;
pub mod sim;
