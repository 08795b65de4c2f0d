//! Simulation of photon blockade in a driven two-atom cavity QED system.
//!
//! Two two-level atoms share a single cavity mode with couplings `g₁ = g` and
//! `g₂ = g·cos φ_z`, both atoms are driven coherently, and the cavity and
//! atoms decay. The crate builds the Lindblad generator on a truncated Fock
//! space, solves for steady states, propagates conditional states for delayed
//! correlations and evaluates photon statistics. Rates are in units of κ.

pub mod config;
pub mod dressed;
pub mod error;
pub mod hilbert;
pub mod model;
pub mod observables;
pub mod runner;
pub mod solvers;

pub use error::{Error, Result};
pub use hilbert::{
    annihilation, creation, expectation, make_space, number, sigma_minus, sigma_plus,
    DensityMatrix, HilbertSpace, Operator,
};
pub use model::{build_hamiltonian, build_liouvillian, build_model, Liouvillian, SystemParams};
