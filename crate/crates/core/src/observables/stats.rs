//! Cavity photon-number distribution and its deviation from a Poisson
//! distribution of the same mean.

use serde::{Deserialize, Serialize};

use crate::hilbert::DensityMatrix;

/// Poisson probabilities below this are reported as undefined deviations.
pub const POISSON_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonStatistics {
    pub mean_n: f64,
    pub p_n: Vec<f64>,
    pub poisson: Vec<f64>,
    /// (pₙ − 𝒫ₙ)/𝒫ₙ, `None` where 𝒫ₙ < [`POISSON_FLOOR`].
    pub deviation: Vec<Option<f64>>,
}

/// e^{−m} mⁿ / n!, evaluated in log space.
pub fn poisson(mean: f64, n: usize) -> f64 {
    if mean <= 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    (-mean + n as f64 * mean.ln() - ln_fact).exp()
}

pub fn photon_statistics(rho: &DensityMatrix) -> PhotonStatistics {
    let p_n = rho.photon_distribution();
    let mean_n: f64 = p_n.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let poisson: Vec<f64> = (0..p_n.len()).map(|n| poisson(mean_n, n)).collect();
    let deviation = p_n
        .iter()
        .zip(&poisson)
        .map(|(&p, &q)| (q >= POISSON_FLOOR).then(|| (p - q) / q))
        .collect();
    PhotonStatistics {
        mean_n,
        p_n,
        poisson,
        deviation,
    }
}
