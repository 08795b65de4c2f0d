//! Zero-delay and delayed photon correlation functions.
//!
//! Delayed correlations follow the quantum regression theorem: the
//! jump-conditioned state `aᵏ ρ_ss a†ᵏ` is propagated under the same
//! Liouvillian and ⟨a†a⟩(τ) is read off. For the third order, two photons are
//! detected at `t` and one at `t + τ`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{annihilation, DensityMatrix, HilbertSpace};
use crate::model::Liouvillian;
use crate::solvers::{conditional_state, propagate_with, PropagationSpec};

/// Below this ⟨a†a⟩ the normalized correlations are undefined.
pub const MIN_MEAN_PHOTONS: f64 = 1e-12;

/// Normally ordered moment ⟨a†ᵏ aᵏ⟩ = Σₙ pₙ · n!/(n−k)!.
pub fn factorial_moment(rho: &DensityMatrix, k: u32) -> f64 {
    rho.photon_distribution()
        .iter()
        .enumerate()
        .map(|(n, p)| p * falling_factorial(n, k))
        .sum()
}

fn falling_factorial(n: usize, k: u32) -> f64 {
    (0..k as usize)
        .map(|i| n as f64 - i as f64)
        .product::<f64>()
        .max(0.0)
}

pub fn mean_photon_number(rho: &DensityMatrix) -> f64 {
    factorial_moment(rho, 1)
}

fn normalized_moment(rho: &DensityMatrix, k: u32) -> Result<f64> {
    let mean_n = mean_photon_number(rho);
    if mean_n < MIN_MEAN_PHOTONS {
        return Err(Error::UndefinedCorrelation { mean_n });
    }
    Ok(factorial_moment(rho, k) / mean_n.powi(k as i32))
}

/// g⁽²⁾(0) = ⟨a†²a²⟩ / ⟨a†a⟩².
pub fn g2_zero(rho: &DensityMatrix) -> Result<f64> {
    normalized_moment(rho, 2)
}

/// g⁽³⁾(0) = ⟨a†³a³⟩ / ⟨a†a⟩³.
pub fn g3_zero(rho: &DensityMatrix) -> Result<f64> {
    rho.space().require_three_photons()?;
    normalized_moment(rho, 3)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub order: u32,
    /// Delays in units of 1/κ, starting at 0.
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
}

impl CorrelationSeries {
    pub fn dt(&self) -> f64 {
        if self.tau.len() > 1 {
            self.tau[1] - self.tau[0]
        } else {
            0.0
        }
    }

    /// Value at the sample nearest to `tau`.
    pub fn at(&self, tau: f64) -> Option<f64> {
        let dt = self.dt();
        if dt <= 0.0 {
            return self.values.first().copied();
        }
        let k = (tau / dt).round();
        if k < 0.0 {
            return None;
        }
        self.values.get(k as usize).copied()
    }
}

fn cavity_occupation(space: HilbertSpace, v: &[C64]) -> f64 {
    let d = space.dim();
    (0..d)
        .map(|i| space.decompose(i).0 as f64 * v[i * d + i].re)
        .sum()
}

fn delayed(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    spec: &PropagationSpec,
    detections: u32,
) -> Result<CorrelationSeries> {
    let space = l.space();
    if rho_ss.space() != space {
        return Err(Error::SpaceMismatch {
            left: space.n_max(),
            right: rho_ss.space().n_max(),
        });
    }
    if detections == 2 {
        space.require_three_photons()?;
    }
    let mean_n = mean_photon_number(rho_ss);
    if mean_n < MIN_MEAN_PHOTONS {
        return Err(Error::UndefinedCorrelation { mean_n });
    }
    let (conditioned, _) = conditional_state(rho_ss, &annihilation(space), detections)?;
    let denom = mean_n.powi(detections as i32 + 1);
    let mut tau = Vec::with_capacity(spec.samples());
    let mut values = Vec::with_capacity(spec.samples());
    propagate_with(l, &conditioned, spec, |t, v| {
        tau.push(t);
        values.push(cavity_occupation(space, v) / denom);
    })?;
    Ok(CorrelationSeries {
        order: detections + 1,
        tau,
        values,
    })
}

/// g⁽²⁾(τ) = ⟨a†a⟩(τ | aρ_ss a†) / ⟨a†a⟩²_ss.
pub fn g2_tau(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    spec: &PropagationSpec,
) -> Result<CorrelationSeries> {
    delayed(l, rho_ss, spec, 1)
}

/// g⁽³⁾(τ) = ⟨a†a⟩(τ | a²ρ_ss a†²) / ⟨a†a⟩³_ss.
pub fn g3_tau(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    spec: &PropagationSpec,
) -> Result<CorrelationSeries> {
    delayed(l, rho_ss, spec, 2)
}
