//! Driven two-atom Tavis–Cummings Hamiltonian and its Lindblad generator.
//!
//! All rates and detunings are in units of the cavity decay rate κ, which is
//! fixed to 1. The dissipators use the `2·LρL† − L†Lρ − ρL†L` convention, so
//! an empty cavity mode loses ⟨a†a⟩ at rate 2κ.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, sigma_minus, DensityMatrix, HilbertSpace, Operator, HERMITICITY_TOL,
};

/// Model parameters in units of κ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Atom–cavity coupling strength of atom 1 (at the antinode).
    pub g: f64,
    /// Relative coupling phase 2πΔz/λ_cav, radians.
    pub phi_z: f64,
    /// Drive Rabi frequency on both atoms.
    pub eta: f64,
    /// Atomic detuning ω_L − ω_A.
    pub delta_a: f64,
    /// Cavity detuning ω_L − ω_cav.
    pub delta_cav: f64,
    /// Atomic decay rate.
    pub gamma: f64,
    /// Cavity decay rate; the unit, always 1.
    pub kappa: f64,
}

impl SystemParams {
    /// Equal atomic and cavity detuning `delta`, γ = κ = 1.
    pub fn new(g: f64, phi_z: f64, eta: f64, delta: f64) -> Self {
        Self {
            g,
            phi_z,
            eta,
            delta_a: delta,
            delta_cav: delta,
            gamma: 1.0,
            kappa: 1.0,
        }
    }

    /// Drive tuned to the two-photon resonance Δ = −√6·g/2.
    pub fn two_photon_resonance(g: f64, phi_z: f64, eta: f64) -> Self {
        Self::new(g, phi_z, eta, two_photon_detuning(g))
    }

    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.delta_a = delta;
        self.delta_cav = delta;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn g1(&self) -> f64 {
        self.g
    }

    pub fn g2(&self) -> f64 {
        self.g * self.phi_z.cos()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g", self.g),
            ("phi_z", self.phi_z),
            ("eta", self.eta),
            ("delta_a", self.delta_a),
            ("delta_cav", self.delta_cav),
            ("gamma", self.gamma),
            ("kappa", self.kappa),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        for (name, v) in [("g", self.g), ("eta", self.eta), ("gamma", self.gamma)] {
            if v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        if self.kappa != 1.0 {
            return Err(Error::InvalidArgument(format!(
                "kappa is the unit of all rates and must be 1, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// Δ = −√6·g/2.
pub fn two_photon_detuning(g: f64) -> f64 {
    -(6f64).sqrt() * g / 2.0
}

/// φ_z for out-of-phase radiation.
pub const OUT_OF_PHASE: f64 = PI;
pub const IN_PHASE: f64 = 0.0;

/// H = Δ_a Σσⱼ⁺σⱼ⁻ + Δ_cav a†a + η Σ(σⱼ⁺ + σⱼ⁻) + Σ gⱼ(aσⱼ⁺ + a†σⱼ⁻).
pub fn build_hamiltonian(space: HilbertSpace, p: &SystemParams) -> Result<Operator> {
    p.validate()?;
    let a = annihilation(space);
    let ad = a.adjoint();
    let mut h = ad.product(&a)?.scaled(p.delta_cav);
    for (j, gj) in [(1, p.g1()), (2, p.g2())] {
        let sm = sigma_minus(space, j)?;
        let sp = sm.adjoint();
        h = h
            .sum(&sp.product(&sm)?.scaled(p.delta_a))?
            .sum(&sp.sum(&sm)?.scaled(p.eta))?
            .sum(&a.product(&sp)?.sum(&ad.product(&sm)?)?.scaled(gj))?;
    }
    Ok(h)
}

/// Sparse Liouvillian acting on column-stacked density matrices, stored in
/// compressed-row form. Row/column `j·dim + i` corresponds to ρ_{ij}.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    space: HilbertSpace,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl Liouvillian {
    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    /// Superoperator dimension dim².
    pub fn size(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Assemble from `(left, right, coefficient)` terms meaning `coeff·LρR`.
    fn from_terms(space: HilbertSpace, terms: &[(&Operator, &Operator, C64)]) -> Self {
        let d = space.dim();
        let mut triplets: Vec<(usize, usize, C64)> = Vec::new();
        for (left, right, coeff) in terms {
            let lnz = left.nonzeros();
            let rnz = right.nonzeros();
            // vec(AρB) = (Bᵀ ⊗ A) vec(ρ): entry (j·d+i, l·d+k) = A_ik · B_lj.
            for &(i, k, av) in &lnz {
                for &(l, j, bv) in &rnz {
                    triplets.push((j * d + i, l * d + k, coeff * av * bv));
                }
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));

        let n = d * d;
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        // Drop exact cancellations.
        let mut out = Self {
            space,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::with_capacity(col_idx.len()),
            values: Vec::with_capacity(values.len()),
        };
        for r in 0..n {
            for k in row_ptr[r]..row_ptr[r + 1] {
                if values[k] != C64::new(0.0, 0.0) {
                    out.col_idx.push(col_idx[k]);
                    out.values.push(values[k]);
                }
            }
            out.row_ptr[r + 1] = out.col_idx.len();
        }
        out
    }

    /// Nonzeros of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r)
            .find(|&(cc, _)| cc == c)
            .map(|(_, v)| v)
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// `out = L · v`.
    pub fn apply_into(&self, v: &[C64], out: &mut [C64]) {
        debug_assert_eq!(v.len(), self.size());
        debug_assert_eq!(out.len(), self.size());
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * v[self.col_idx[k]];
            }
            *o = acc;
        }
    }

    /// `L[ρ]` as a matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.space() != self.space {
            return Err(Error::SpaceMismatch {
                left: self.space.n_max(),
                right: rho.space().n_max(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.size()];
        self.apply_into(rho.as_vec(), &mut out);
        DensityMatrix::from_vec(self.space, &out)
    }

    /// Largest |(L v)_k|, the residual norm used by the steady-state solver.
    pub fn residual_max(&self, v: &[C64]) -> f64 {
        let mut out = vec![C64::new(0.0, 0.0); self.size()];
        self.apply_into(v, &mut out);
        out.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Lower and upper bandwidth of the sparsity pattern.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut lower = 0;
        let mut upper = 0;
        for r in 0..self.size() {
            for (c, _) in self.row(r) {
                if c < r {
                    lower = lower.max(r - c);
                } else {
                    upper = upper.max(c - r);
                }
            }
        }
        (lower, upper)
    }

    /// Gershgorin bound on the spectral radius (max absolute row sum).
    pub fn spectral_bound(&self) -> f64 {
        (0..self.size())
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// L[ρ] = −i[H,ρ] + κ(2aρa† − a†aρ − ρa†a) + γ Σⱼ(2σⱼ⁻ρσⱼ⁺ − σⱼ⁺σⱼ⁻ρ − ρσⱼ⁺σⱼ⁻).
pub fn build_liouvillian(h: &Operator, p: &SystemParams) -> Result<Liouvillian> {
    p.validate()?;
    let herm = h.hermiticity_error();
    if herm > HERMITICITY_TOL {
        return Err(Error::InvalidArgument(format!(
            "Hamiltonian is not Hermitian (max |H-H†| = {herm:.3e})"
        )));
    }
    let space = h.space();
    let eye = Operator::identity(space);
    let one = C64::new(1.0, 0.0);
    let minus_i = C64::new(0.0, -1.0);

    let collapse = [
        (p.kappa, annihilation(space)),
        (p.gamma, sigma_minus(space, 1)?),
        (p.gamma, sigma_minus(space, 2)?),
    ];
    let mut parts: Vec<(Operator, Operator, C64)> = vec![
        (h.clone(), eye.clone(), minus_i),
        (eye.clone(), h.clone(), -minus_i),
    ];
    for (rate, c) in collapse {
        if rate == 0.0 {
            continue;
        }
        let cd = c.adjoint();
        let cdc = cd.product(&c)?;
        parts.push((c, cd, C64::new(2.0 * rate, 0.0)));
        parts.push((cdc.clone(), eye.clone(), -rate * one));
        parts.push((eye.clone(), cdc, -rate * one));
    }
    let terms: Vec<(&Operator, &Operator, C64)> =
        parts.iter().map(|(l, r, c)| (l, r, *c)).collect();
    Ok(Liouvillian::from_terms(space, &terms))
}

/// Convenience: Hamiltonian and Liouvillian in one call.
pub fn build_model(space: HilbertSpace, p: &SystemParams) -> Result<(Operator, Liouvillian)> {
    let h = build_hamiltonian(space, p)?;
    let l = build_liouvillian(&h, p)?;
    Ok((h, l))
}
