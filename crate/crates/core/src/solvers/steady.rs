//! Stationary state of a Liouvillian.
//!
//! The linear system `L·vec(ρ) = 0` becomes nonsingular once the equation for
//! ρ₀₀ is replaced by the trace constraint `Σᵢ ρᵢᵢ = 1`. That system differs
//! from `B` (the same row replaced by the unit row `e₀`) by a rank-one term,
//! and Sherman–Morrison collapses its solution to `x = z / tr(z)` with
//! `B z = e₀`. `B` keeps the band structure of `L`, so a banded LU solves it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::hilbert::DensityMatrix;
use crate::model::Liouvillian;

/// Maximum tolerated ‖L[ρ_ss]‖_max.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

/// Relative pivot below which the pinned system is treated as singular.
const SINGULAR_PIVOT: f64 = 1e-12;

/// Steady state together with solver diagnostics.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// ‖L[ρ_ss]‖_max after Hermitization.
    pub residual: f64,
}

pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    steady_state_with_residual(l).map(|s| s.rho)
}

pub fn steady_state_with_residual(l: &Liouvillian) -> Result<SteadyState> {
    let space = l.space();
    let d = space.dim();
    let n = l.size();

    let (kl, ku) = l.bandwidths();
    let mut band = BandedMatrix::zeros(n, kl, ku);
    band.set(0, 0, C64::new(1.0, 0.0));
    for r in 1..n {
        for (c, v) in l.row(r) {
            band.set(r, c, v);
        }
    }
    let lu = band.factor();
    let mut z = if lu.min_relative_pivot > SINGULAR_PIVOT {
        let mut z = vec![C64::new(0.0, 0.0); n];
        z[0] = C64::new(1.0, 0.0);
        lu.solve(&mut z);
        let tr: C64 = (0..d).map(|i| z[i * d + i]).sum();
        z.iter_mut().for_each(|x| *x /= tr);
        z
    } else {
        // ρ₀₀ = 0 or a degenerate null space; settle it on the literal
        // trace-row system.
        dense_trace_row_solve(l)?
    };

    for x in z.iter_mut() {
        if !x.re.is_finite() || !x.im.is_finite() {
            return Err(Error::AmbiguousSteadyState { pivot: 0.0 });
        }
    }
    let mut rho = DensityMatrix::from_vec(space, &z)?;
    rho.hermitize();
    let tr = rho.trace().re;
    rho = rho.scaled(1.0 / tr);
    z.copy_from_slice(rho.as_vec());

    let residual = l.residual_max(&z);
    if residual > STEADY_RESIDUAL_TOL {
        return Err(Error::Convergence {
            residual,
            tolerance: STEADY_RESIDUAL_TOL,
        });
    }
    rho.check_positive()?;
    Ok(SteadyState { rho, residual })
}

fn dense_trace_row_solve(l: &Liouvillian) -> Result<Vec<C64>> {
    let d = l.space().dim();
    let n = l.size();
    let mut m = l.to_dense();
    let mut rhs = DVector::<C64>::zeros(n);
    for c in 0..n {
        m[(0, c)] = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        m[(0, i * d + i)] = C64::new(1.0, 0.0);
    }
    rhs[0] = C64::new(1.0, 0.0);
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lu = m.lu();
    let u: DMatrix<C64> = lu.u();
    let min_pivot = u
        .diagonal()
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min);
    if min_pivot <= SINGULAR_PIVOT * scale {
        return Err(Error::AmbiguousSteadyState {
            pivot: min_pivot / scale,
        });
    }
    let x = lu
        .solve(&rhs)
        .ok_or(Error::AmbiguousSteadyState { pivot: 0.0 })?;
    Ok(x.iter().copied().collect())
}
