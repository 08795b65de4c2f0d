//! Steady-state parameter scans. Points are independent and evaluated in
//! parallel; results are always ordered by grid index.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::{g2_zero, g3_zero, mean_photon_number};
use crate::error::Result;
use crate::hilbert::HilbertSpace;
use crate::model::{build_model, two_photon_detuning, SystemParams};
use crate::solvers::steady_state_with_residual;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    /// Δ_a = Δ_cav = Δ, in units of κ.
    Delta,
    /// Drive Rabi frequency η, in units of κ.
    Eta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    pub value: f64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub swept_parameter: SweptParameter,
    pub grid: Vec<f64>,
    /// Failed points hold NaN.
    pub columns: Vec<Column>,
    /// Steady-state residual per point, NaN where the solve failed.
    pub residuals: Vec<f64>,
    pub failures: Vec<PointFailure>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .copied()
            .filter(|r| r.is_finite())
            .fold(0.0, f64::max)
    }
}

struct PointValues {
    residual: f64,
    values: Vec<f64>,
}

fn scan<F>(
    space: HilbertSpace,
    swept: SweptParameter,
    grid: &[f64],
    names: &[&str],
    params_at: impl Fn(f64) -> SystemParams + Sync,
    measure: F,
) -> SweepResult
where
    F: Fn(&crate::hilbert::DensityMatrix) -> Result<Vec<f64>> + Sync,
{
    let outcomes: Vec<Result<PointValues>> = grid
        .par_iter()
        .map(|&x| {
            let p = params_at(x);
            let (_, l) = build_model(space, &p)?;
            let ss = steady_state_with_residual(&l)?;
            Ok(PointValues {
                residual: ss.residual,
                values: measure(&ss.rho)?,
            })
        })
        .collect();

    let mut columns: Vec<Column> = names
        .iter()
        .map(|n| Column {
            name: n.to_string(),
            values: Vec::with_capacity(grid.len()),
        })
        .collect();
    let mut residuals = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for (index, (outcome, &value)) in outcomes.into_iter().zip(grid).enumerate() {
        match outcome {
            Ok(pv) => {
                residuals.push(pv.residual);
                for (c, v) in columns.iter_mut().zip(pv.values) {
                    c.values.push(v);
                }
            }
            Err(e) => {
                residuals.push(f64::NAN);
                columns.iter_mut().for_each(|c| c.values.push(f64::NAN));
                failures.push(PointFailure {
                    index,
                    value,
                    error: e.to_string(),
                });
            }
        }
    }
    SweepResult {
        swept_parameter: swept,
        grid: grid.to_vec(),
        columns,
        residuals,
        failures,
    }
}

/// Steady-state ⟨a†a⟩ over detunings Δ (units of κ), with Δ_a = Δ_cav = Δ.
pub fn spectrum_scan(space: HilbertSpace, base: &SystemParams, delta_grid: &[f64]) -> SweepResult {
    let base = *base;
    scan(
        space,
        SweptParameter::Delta,
        delta_grid,
        &["mean_n"],
        move |d| base.with_detuning(d),
        |rho| Ok(vec![mean_photon_number(rho)]),
    )
}

/// Steady-state ⟨a†a⟩, g⁽²⁾(0) and g⁽³⁾(0) over drive strengths η at the
/// two-photon resonance Δ = −√6·g/2 (the base detuning is overridden).
pub fn rabi_scan(space: HilbertSpace, base: &SystemParams, eta_grid: &[f64]) -> SweepResult {
    let base = base.with_detuning(two_photon_detuning(base.g));
    scan(
        space,
        SweptParameter::Eta,
        eta_grid,
        &["mean_n", "g2_0", "g3_0"],
        move |eta| base.with_eta(eta),
        |rho| Ok(vec![mean_photon_number(rho), g2_zero(rho)?, g3_zero(rho)?]),
    )
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (points - 1) as f64;
            (0..points).map(|k| start + step * k as f64).collect()
        }
    }
}
