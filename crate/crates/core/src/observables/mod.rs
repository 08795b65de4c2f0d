//! Quantities read off steady states and regression-theorem propagations.

pub mod analysis;
pub mod correlation;
pub mod stats;
pub mod sweep;

pub use correlation::{
    factorial_moment, g2_tau, g2_zero, g3_tau, g3_zero, mean_photon_number, CorrelationSeries,
};
pub use stats::{photon_statistics, PhotonStatistics};
pub use sweep::{linspace, rabi_scan, spectrum_scan, SweepResult, SweptParameter};
