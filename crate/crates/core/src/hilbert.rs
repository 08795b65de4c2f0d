//! Truncated composite Hilbert space (cavity Fock ⊗ atom 1 ⊗ atom 2) and the
//! elementary operators living on it.
//!
//! Basis index = `fock * 4 + atom1 * 2 + atom2`, with atom bit 0 = |g⟩ and
//! 1 = |e⟩. Every matrix built anywhere in the crate uses this ordering.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const N_ATOMS: usize = 2;
const ATOM_DIM: usize = 1 << N_ATOMS;

/// Truncated space: Fock levels `0..=n_max` for the cavity, two two-level atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    n_max: usize,
}

impl HilbertSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidArgument(format!(
                "n_max must be >= 1, got {n_max}"
            )));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_atoms(&self) -> usize {
        N_ATOMS
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) * ATOM_DIM
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Basis index of |fock; atom1, atom2⟩ (atom flags: `true` = excited).
    pub fn index(&self, fock: usize, atom1: bool, atom2: bool) -> usize {
        debug_assert!(fock <= self.n_max);
        fock * ATOM_DIM + (atom1 as usize) * 2 + atom2 as usize
    }

    /// Inverse of [`HilbertSpace::index`].
    pub fn decompose(&self, index: usize) -> (usize, bool, bool) {
        (index / ATOM_DIM, index & 2 != 0, index & 1 != 0)
    }

    /// Total excitation number (photons + excited atoms) of a basis state.
    pub fn excitations(&self, index: usize) -> usize {
        let (n, e1, e2) = self.decompose(index);
        n + e1 as usize + e2 as usize
    }

    /// Errors with [`Error::InvalidArgument`] when three-photon observables
    /// cannot be represented.
    pub fn require_three_photons(&self) -> Result<()> {
        if self.n_max < 3 {
            return Err(Error::InvalidArgument(format!(
                "three-photon observables need n_max >= 3, got {}",
                self.n_max
            )));
        }
        Ok(())
    }

    fn check_same(&self, other: &HilbertSpace) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch {
                left: self.n_max,
                right: other.n_max,
            });
        }
        Ok(())
    }
}

/// `make_space`: the public constructor under its operational name.
pub fn make_space(n_max: usize) -> Result<HilbertSpace> {
    HilbertSpace::new(n_max)
}

/// A complex `dim × dim` matrix on a [`HilbertSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(space: HilbertSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "operator must be {d}x{d}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    /// Matrix product `self · rhs`.
    pub fn product(&self, rhs: &Operator) -> Result<Self> {
        self.space.check_same(&rhs.space)?;
        Ok(Self {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn sum(&self, rhs: &Operator) -> Result<Self> {
        self.space.check_same(&rhs.space)?;
        Ok(Self {
            space: self.space,
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    pub fn difference(&self, rhs: &Operator) -> Result<Self> {
        self.space.check_same(&rhs.space)?;
        Ok(Self {
            space: self.space,
            matrix: &self.matrix - &rhs.matrix,
        })
    }

    pub fn scaled(&self, factor: impl Into<C64>) -> Self {
        Self {
            space: self.space,
            matrix: &self.matrix * factor.into(),
        }
    }

    /// `[self, rhs] = self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Operator) -> Result<Self> {
        self.space.check_same(&rhs.space)?;
        Ok(Self {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix,
        })
    }

    /// `self^k`; `k = 0` gives the identity.
    pub fn power(&self, k: u32) -> Self {
        let mut out = Operator::identity(self.space);
        for _ in 0..k {
            out.matrix = &out.matrix * &self.matrix;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entry of `|A − A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    /// Nonzero entries as `(row, col, value)`, row-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        let d = self.space.dim();
        let mut out = Vec::new();
        for r in 0..d {
            for c in 0..d {
                let v = self.matrix[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    out.push((r, c, v));
                }
            }
        }
        out
    }
}

fn fock_lowering(n_max: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(n_max + 1, n_max + 1);
    for n in 1..=n_max {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

fn atom_lowering() -> DMatrix<C64> {
    let mut s = DMatrix::zeros(2, 2);
    s[(0, 1)] = C64::new(1.0, 0.0);
    s
}

/// Cavity annihilation operator `a ⊗ 1 ⊗ 1`.
pub fn annihilation(space: HilbertSpace) -> Operator {
    let eye_atoms = DMatrix::<C64>::identity(ATOM_DIM, ATOM_DIM);
    Operator {
        space,
        matrix: fock_lowering(space.n_max).kronecker(&eye_atoms),
    }
}

pub fn creation(space: HilbertSpace) -> Operator {
    annihilation(space).adjoint()
}

/// `a†a`.
pub fn number(space: HilbertSpace) -> Operator {
    let d = space.dim();
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(space.decompose(i).0 as f64, 0.0);
    }
    Operator { space, matrix: m }
}

/// Lowering operator σⱼ⁻ of atom `j ∈ {1, 2}`.
pub fn sigma_minus(space: HilbertSpace, j: usize) -> Result<Operator> {
    let eye2 = DMatrix::<C64>::identity(2, 2);
    let atoms = match j {
        1 => atom_lowering().kronecker(&eye2),
        2 => eye2.kronecker(&atom_lowering()),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "atom index must be 1 or 2, got {j}"
            )))
        }
    };
    let eye_fock = DMatrix::<C64>::identity(space.fock_dim(), space.fock_dim());
    Ok(Operator {
        space,
        matrix: eye_fock.kronecker(&atoms),
    })
}

pub fn sigma_plus(space: HilbertSpace, j: usize) -> Result<Operator> {
    Ok(sigma_minus(space, j)?.adjoint())
}

/// A density matrix. Normalization is not enforced at construction so that
/// unnormalized conditional states share the type; see [`DensityMatrix::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: DMatrix<C64>,
}

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl DensityMatrix {
    pub fn from_matrix(space: HilbertSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "density matrix must be {d}x{d}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    /// Column-stacked vector `vec(ρ)` back into a matrix.
    pub fn from_vec(space: HilbertSpace, v: &[C64]) -> Result<Self> {
        let d = space.dim();
        if v.len() != d * d {
            return Err(Error::InvalidArgument(format!(
                "vectorized state must have length {}, got {}",
                d * d,
                v.len()
            )));
        }
        Ok(Self {
            space,
            matrix: DMatrix::from_column_slice(d, d, v),
        })
    }

    /// Projector onto the basis state |fock; atom1, atom2⟩.
    pub fn basis_projector(
        space: HilbertSpace,
        fock: usize,
        atom1: bool,
        atom2: bool,
    ) -> Result<Self> {
        if fock > space.n_max() {
            return Err(Error::InvalidArgument(format!(
                "Fock level {fock} exceeds n_max {}",
                space.n_max()
            )));
        }
        let d = space.dim();
        let i = space.index(fock, atom1, atom2);
        let mut m = DMatrix::zeros(d, d);
        m[(i, i)] = C64::new(1.0, 0.0);
        Ok(Self { space, matrix: m })
    }

    /// |n; g, g⟩⟨n; g, g|.
    pub fn fock(space: HilbertSpace, n: usize) -> Result<Self> {
        Self::basis_projector(space, n, false, false)
    }

    pub fn vacuum(space: HilbertSpace) -> Self {
        Self::fock(space, 0).expect("vacuum is always representable")
    }

    /// |ψ⟩⟨ψ| for a normalized-or-not amplitude vector.
    pub fn pure(space: HilbertSpace, psi: &DVector<C64>) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(Error::InvalidArgument(format!(
                "state vector must have length {}, got {}",
                space.dim(),
                psi.len()
            )));
        }
        Ok(Self {
            space,
            matrix: psi * psi.adjoint(),
        })
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: DMatrix::identity(d, d) / C64::new(d as f64, 0.0),
        }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Column-stacked `vec(ρ)`.
    pub fn as_vec(&self) -> &[C64] {
        self.matrix.as_slice()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    /// Replace ρ by (ρ + ρ†)/2.
    pub fn hermitize(&mut self) {
        let adj = self.matrix.adjoint();
        self.matrix = (&self.matrix + adj) * C64::new(0.5, 0.0);
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            space: self.space,
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let adj = self.matrix.adjoint();
        let herm = (&self.matrix + adj) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn check_positive(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }

    /// Checks Hermiticity, unit trace and positivity at the crate tolerances.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix is not Hermitian (max |ρ-ρ†| = {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        self.check_positive()
    }

    /// Cavity photon-number marginal `p_n = Σ_atoms ⟨n, s₁s₂|ρ|n, s₁s₂⟩`.
    pub fn photon_distribution(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.space.fock_dim()];
        for i in 0..self.space.dim() {
            p[self.space.decompose(i).0] += self.matrix[(i, i)].re;
        }
        p
    }
}

/// `tr(A ρ)`.
pub fn expectation(op: &Operator, rho: &DensityMatrix) -> Result<C64> {
    op.space.check_same(&rho.space)?;
    let d = op.space.dim();
    let (a, r) = (&op.matrix, &rho.matrix);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * r[(k, i)];
        }
    }
    Ok(acc)
}

/// `A ρ B` as a new (generally unnormalized) density matrix.
pub fn sandwich(left: &Operator, rho: &DensityMatrix, right: &Operator) -> Result<DensityMatrix> {
    left.space.check_same(&rho.space)?;
    right.space.check_same(&rho.space)?;
    Ok(DensityMatrix {
        space: rho.space,
        matrix: &left.matrix * &rho.matrix * &right.matrix,
    })
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn dimensions() {
        assert_eq!(make_space(1).unwrap().dim(), 8);
        assert_eq!(make_space(8).unwrap().dim(), 36);
        assert!(matches!(make_space(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn index_roundtrip() {
        let s = make_space(3).unwrap();
        for i in 0..s.dim() {
            let (n, e1, e2) = s.decompose(i);
            assert_eq!(s.index(n, e1, e2), i);
        }
        assert_eq!(s.index(2, true, false), 10);
    }

    #[test]
    fn ladder_entries() {
        let s = make_space(2).unwrap();
        let a = annihilation(s);
        let nz: Vec<_> = a.nonzeros();
        // Four atom configurations per Fock transition.
        assert_eq!(nz.len(), 8);
        let g = |n| s.index(n, false, false);
        assert_eq!(a.matrix()[(g(0), g(1))], c(1.0));
        assert!((a.matrix()[(g(1), g(2))] - c(2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn number_operator_spectrum() {
        let s = make_space(5).unwrap();
        let a = annihilation(s);
        let n = a.adjoint().product(&a).unwrap();
        assert!(max_abs_diff(n.matrix(), number(s).matrix()) < 1e-14);
        let mut ev: Vec<f64> = n.matrix().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (k, chunk) in ev.chunks(4).enumerate() {
            for v in chunk {
                assert!((v - k as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn annihilation_kills_vacuum() {
        let s = make_space(3).unwrap();
        let a = annihilation(s);
        let out = sandwich(&a, &DensityMatrix::vacuum(s), &a.adjoint()).unwrap();
        assert!(out.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn two_level_algebra() {
        let s = make_space(2).unwrap();
        let sm1 = sigma_minus(s, 1).unwrap();
        let sp1 = sigma_plus(s, 1).unwrap();
        let sm2 = sigma_minus(s, 2).unwrap();
        assert!(sm1.power(2).matrix().iter().all(|z| z.norm() == 0.0));
        let anti = sp1
            .product(&sm1)
            .unwrap()
            .sum(&sm1.product(&sp1).unwrap())
            .unwrap();
        assert_eq!(anti, Operator::identity(s));
        assert!(sm1
            .commutator(&sm2)
            .unwrap()
            .matrix()
            .iter()
            .all(|z| z.norm() == 0.0));
        assert!(matches!(sigma_minus(s, 3), Err(Error::InvalidArgument(_))));
        assert!(matches!(sigma_minus(s, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn sigma_minus_lowers_the_right_atom() {
        let s = make_space(1).unwrap();
        let sm1 = sigma_minus(s, 1).unwrap();
        let sm2 = sigma_minus(s, 2).unwrap();
        assert_eq!(
            sm1.matrix()[(s.index(1, false, true), s.index(1, true, true))],
            c(1.0)
        );
        assert_eq!(
            sm2.matrix()[(s.index(0, true, false), s.index(0, true, true))],
            c(1.0)
        );
    }

    #[test]
    fn cavity_and_atom_operators_commute() {
        let s = make_space(4).unwrap();
        let a = annihilation(s);
        for j in 1..=2 {
            for atom in [sigma_minus(s, j).unwrap(), sigma_plus(s, j).unwrap()] {
                for cav in [a.clone(), a.adjoint()] {
                    let comm = cav.commutator(&atom).unwrap();
                    assert!(comm.matrix().iter().all(|z| z.norm() == 0.0));
                }
            }
        }
    }

    #[test]
    fn expectations() {
        let s = make_space(4).unwrap();
        let n = number(s);
        assert_eq!(expectation(&n, &DensityMatrix::vacuum(s)).unwrap(), c(0.0));
        let two = DensityMatrix::fock(s, 2).unwrap();
        assert_eq!(expectation(&n, &two).unwrap(), c(2.0));
        let mixed = DensityMatrix::maximally_mixed(s);
        let e = expectation(&Operator::identity(s), &mixed).unwrap();
        assert!((e - c(1.0)).norm() < 1e-14);
        let other = make_space(3).unwrap();
        assert!(matches!(
            expectation(&number(other), &mixed),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn mixing_spaces_is_rejected() {
        let a = annihilation(make_space(2).unwrap());
        let b = annihilation(make_space(3).unwrap());
        assert!(a.product(&b).is_err());
        assert!(a.sum(&b).is_err());
        assert!(a.commutator(&b).is_err());
    }

    #[test]
    fn validation() {
        let s = make_space(2).unwrap();
        assert!(DensityMatrix::maximally_mixed(s).validate().is_ok());
        let twice = DensityMatrix::vacuum(s).scaled(2.0);
        assert!(twice.validate().is_err());
        let mut m = DMatrix::zeros(s.dim(), s.dim());
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        let neg = DensityMatrix::from_matrix(s, m).unwrap();
        assert!(matches!(neg.validate(), Err(Error::NotPositive { .. })));
        assert!(s.require_three_photons().is_err());
    }
}
