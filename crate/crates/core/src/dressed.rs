//! Weak-pump dressed-state structure in the collective basis.
//!
//! Within the `n`-photon manifold the Hamiltonian at zero detuning and zero
//! drive is a small real symmetric block in the basis
//! `(|gg,n⟩, |+,n−1⟩, |−,n−1⟩, |ee,n−2⟩)`, where `|±⟩ = (|eg⟩ ± |ge⟩)/√2`.
//! For `n = 1` the `|ee⟩` state does not exist and the block is 3×3.
//! In phase (φ_z = 0) the cavity couples through `|+⟩` and `|−⟩` is dark;
//! out of phase (φ_z = π) the roles swap.
//!
//! The out-of-phase block uses a `+√(2(n−1))g` coupling between `|−⟩` and
//! `|ee⟩`. In the full model's product basis that element carries a minus
//! sign; the two differ by the sign of the `|ee⟩` basis vector only, so
//! eigenvalues agree exactly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;

const PHASE_TOL: f64 = 1e-12;

/// Which collective atomic state the cavity talks to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radiation {
    /// φ_z = 0, g₂ = +g.
    InPhase,
    /// φ_z = π, g₂ = −g.
    OutOfPhase,
}

impl Radiation {
    pub fn from_phase(phi_z: f64) -> Result<Self> {
        if phi_z.abs() < PHASE_TOL {
            Ok(Radiation::InPhase)
        } else if (phi_z - std::f64::consts::PI).abs() < PHASE_TOL {
            Ok(Radiation::OutOfPhase)
        } else {
            Err(Error::Unsupported(format!(
                "collective blocks exist only for phi_z in {{0, pi}}, got {phi_z}"
            )))
        }
    }

    pub fn phase(self) -> f64 {
        match self {
            Radiation::InPhase => 0.0,
            Radiation::OutOfPhase => std::f64::consts::PI,
        }
    }

    /// Index of the bright single-excitation collective state.
    fn bright(self) -> usize {
        match self {
            Radiation::InPhase => PLUS,
            Radiation::OutOfPhase => MINUS,
        }
    }

    fn dark(self) -> usize {
        match self {
            Radiation::InPhase => MINUS,
            Radiation::OutOfPhase => PLUS,
        }
    }
}

pub const GG: usize = 0;
pub const PLUS: usize = 1;
pub const MINUS: usize = 2;
pub const EE: usize = 3;

pub const BASIS_LABELS: [&str; 4] = ["gg,n", "+,n-1", "-,n-1", "ee,n-2"];

/// The `n`-photon manifold Hamiltonian in the collective basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveBlock {
    pub n: usize,
    pub radiation: Radiation,
    pub g: f64,
    pub matrix: DMatrix<f64>,
}

impl CollectiveBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn build_block(n: usize, phi_z: f64, g: f64) -> Result<CollectiveBlock> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!(
            "photon-space index must be >= 1, got {n}"
        )));
    }
    if !g.is_finite() || g < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "g must be finite and >= 0, got {g}"
        )));
    }
    let radiation = Radiation::from_phase(phi_z)?;
    let dim = if n == 1 { 3 } else { 4 };
    let mut m = DMatrix::zeros(dim, dim);
    let bright = radiation.bright();
    let lower = (2.0 * n as f64).sqrt() * g;
    m[(GG, bright)] = lower;
    m[(bright, GG)] = lower;
    if n >= 2 {
        let upper = (2.0 * (n - 1) as f64).sqrt() * g;
        m[(bright, EE)] = upper;
        m[(EE, bright)] = upper;
    }
    Ok(CollectiveBlock {
        n,
        radiation,
        g,
        matrix: m,
    })
}

/// One eigenstate of a collective block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressedLevel {
    pub n: usize,
    /// Energy in units of g.
    pub energy_over_g: f64,
    /// Amplitudes over `(|gg,n⟩, |+,n−1⟩, |−,n−1⟩[, |ee,n−2⟩])`.
    pub amplitudes: Vec<f64>,
}

impl DressedLevel {
    pub fn energy(&self, g: f64) -> f64 {
        self.energy_over_g * g
    }
}

/// Eigenstates sorted by energy. Amplitude signs are fixed so that the
/// `|gg,n⟩` component is nonnegative (first nonzero component when it
/// vanishes). Inside a degenerate zero-energy pair the dark collective state
/// is split off as its own level.
pub fn eigensystem(block: &CollectiveBlock) -> Vec<DressedLevel> {
    let dim = block.dim();
    // The spectrum scales linearly in g; diagonalize the unit-g block.
    let unit = if block.g > 0.0 {
        &block.matrix / block.g
    } else {
        block.matrix.clone()
    };
    let eig = unit.symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..dim)
        .map(|k| {
            (
                eig.eigenvalues[k],
                eig.eigenvectors.column(k).iter().copied().collect(),
            )
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let dark = block.radiation.dark();
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (pairs[end].0 - pairs[start].0).abs() < 1e-9 {
            end += 1;
        }
        if end - start > 1 {
            split_dark(&mut pairs[start..end], dark);
        }
        start = end;
    }

    pairs
        .into_iter()
        .map(|(e, mut v)| {
            fix_sign(&mut v);
            DressedLevel {
                n: block.n,
                energy_over_g: if e.abs() < 1e-14 { 0.0 } else { e },
                amplitudes: v,
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Re-span a degenerate cluster so that the dark basis vector, when it lies
/// in the cluster, becomes the last member and the rest are orthonormal to it.
fn split_dark(cluster: &mut [(f64, Vec<f64>)], dark: usize) {
    let dim = cluster[0].1.len();
    let weight: f64 = cluster.iter().map(|(_, v)| v[dark] * v[dark]).sum();
    if (weight - 1.0).abs() > 1e-9 {
        return;
    }
    let mut unit = vec![0.0; dim];
    unit[dark] = 1.0;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (_, v) in cluster.iter() {
        let mut w = v.clone();
        for b in basis.iter().chain(std::iter::once(&unit)) {
            let c = dot(&w, b);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let norm = dot(&w, &w).sqrt();
        if norm > 1e-8 && basis.len() + 1 < cluster.len() {
            basis.push(w.iter().map(|x| x / norm).collect());
        }
    }
    basis.push(unit);
    for ((_, v), b) in cluster.iter_mut().zip(basis) {
        *v = b;
    }
}

fn fix_sign(v: &mut [f64]) {
    let pivot = if v[GG].abs() > 1e-12 {
        v[GG]
    } else {
        v.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0)
    };
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Which pair of oscillation mechanisms a prediction is for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    InPhase,
    OutPhase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedFrequency {
    pub label: String,
    /// Angular frequency in units of κ.
    pub frequency: f64,
    /// 2π / frequency, in units of 1/κ.
    pub period: f64,
    /// Whether the mechanism is active for the requested scenario.
    pub applies: bool,
}

/// Detuning between the one-photon dressed level and the two-photon drive,
/// δ = (√2 − √6/2)·g.
pub fn in_phase_detuning(g: f64) -> f64 {
    (2f64.sqrt() - 6f64.sqrt() / 2.0) * g
}

/// Oscillation frequencies of the delayed correlation functions:
/// `fast` = 2√2·g (single-photon exchange with the collective bright state),
/// `slow_in_phase` = √(4η² + δ²), `slow_out_phase` = √(4(√2η)² + Δ²).
pub fn predicted_frequencies(p: &SystemParams, scenario: Scenario) -> Vec<PredictedFrequency> {
    let fast = 2.0 * 2f64.sqrt() * p.g;
    let delta = in_phase_detuning(p.g);
    let slow_in = (4.0 * p.eta * p.eta + delta * delta).sqrt();
    let eta_eff = 2f64.sqrt() * p.eta;
    let slow_out = (4.0 * eta_eff * eta_eff + p.delta_a * p.delta_a).sqrt();
    let entry = |label: &str, f: f64, applies: bool| PredictedFrequency {
        label: label.to_string(),
        frequency: f,
        period: 2.0 * std::f64::consts::PI / f,
        applies,
    };
    vec![
        entry("fast", fast, true),
        entry("slow_in_phase", slow_in, scenario == Scenario::InPhase),
        entry("slow_out_phase", slow_out, scenario == Scenario::OutPhase),
    ]
}
