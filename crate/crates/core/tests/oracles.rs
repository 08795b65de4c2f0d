//! Checks against independent references: dense linear algebra, analytic
//! solutions and Richardson-style convergence.

use blockade::error::Error;
use blockade::model::two_photon_detuning;
use blockade::observables::{g2_tau, g2_zero, g3_tau};
use blockade::solvers::{conditional_state, propagate, steady_state, Method, PropagationSpec};
use blockade::{
    annihilation, build_hamiltonian, build_model, expectation, make_space, number, DensityMatrix,
    SystemParams,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Right singular vector of the smallest singular value, reshaped
/// column-major and trace-normalized.
fn null_space_state(l: &DMatrix<C64>, d: usize) -> (DMatrix<C64>, f64, f64) {
    let svd = l.clone().svd(false, true);
    let v_t = svd.v_t.unwrap();
    let (k, smallest) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(k, &s)| (k, s))
        .unwrap();
    let second = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, &s)| s)
        .fold(f64::INFINITY, f64::min);
    let v: DVector<C64> = v_t.row(k).adjoint();
    let rho = DMatrix::from_column_slice(d, d, v.as_slice());
    let tr = rho.trace();
    (rho / tr, smallest, second)
}

#[test]
fn steady_state_matches_dense_null_space() {
    let s = make_space(2).unwrap();
    for (phi, eta, delta) in [(0.0, 1.0, -18.37), (PI, 3.5, -18.37), (0.7, 0.4, 5.0)] {
        let p = SystemParams::new(15.0, phi, eta, delta);
        let (_, l) = build_model(s, &p).unwrap();
        let dense = l.to_dense();
        let (oracle, smallest, second) = null_space_state(&dense, s.dim());
        assert!(smallest < 1e-10 && second > 1e-6, "{smallest} {second}");
        let rho = steady_state(&l).unwrap();
        let diff = max_abs_diff(rho.matrix(), &oracle);
        assert!(diff < 1e-9, "phi={phi}: {diff}");
    }
}

#[test]
fn generator_spectrum_has_one_zero_and_decays_elsewhere() {
    let s = make_space(2).unwrap();
    let p = SystemParams::new(15.0, 0.0, 1.0, two_photon_detuning(15.0));
    let (_, l) = build_model(s, &p).unwrap();
    let eig = l
        .to_dense()
        .schur()
        .eigenvalues()
        .expect("complex Schur is triangular");
    let mut zero = 0;
    for z in eig.iter() {
        if z.norm() < 1e-9 {
            zero += 1;
        } else {
            assert!(z.re < -1e-6, "{z}");
        }
    }
    assert_eq!(zero, 1);
}

#[test]
fn cavity_decay_is_exponential_in_both_integrators() {
    let s = make_space(4).unwrap();
    let p = SystemParams::new(0.0, 0.0, 0.0, 0.0);
    let (_, l) = build_model(s, &p).unwrap();
    let rho0 = DensityMatrix::fock(s, 3).unwrap();
    for spec in [
        PropagationSpec::fixed_rk4(3.0, 0.05, 15.0),
        PropagationSpec::adaptive(3.0, 0.05, 1e-10, 1e-12),
    ] {
        let ts = propagate(&l, &rho0, &spec).unwrap();
        for (t, rho) in ts.times.iter().zip(&ts.states) {
            let n = expectation(&number(s), rho).unwrap().re;
            assert!(
                (n - 3.0 * (-2.0 * t).exp()).abs() < 1e-8,
                "{:?} t={t}",
                spec.method
            );
        }
    }
}

fn final_state(l: &blockade::Liouvillian, rho0: &DensityMatrix, t: f64, h: f64) -> DMatrix<C64> {
    let spec = PropagationSpec {
        t_max: t,
        dt_out: t,
        method: Method::FixedRk4,
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        max_step: h,
    };
    propagate(l, rho0, &spec)
        .unwrap()
        .states
        .pop()
        .unwrap()
        .into_matrix()
}

#[test]
fn rk4_converges_at_high_order() {
    let s = make_space(2).unwrap();
    let p = SystemParams::new(2.0, 0.0, 1.5, -1.0);
    let (_, l) = build_model(s, &p).unwrap();
    let rho0 = DensityMatrix::vacuum(s);
    let t = 0.8;
    let reference = final_state(&l, &rho0, t, 1e-4);
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| max_abs_diff(&final_state(&l, &rho0, t, h), &reference))
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "observed order {order}, errors {errors:?}");
    }
}

#[test]
fn fixed_and_adaptive_correlations_agree() {
    let s = make_space(6).unwrap();
    let g = 15.0;
    let p = SystemParams::two_photon_resonance(g, 0.0, 1.0);
    let (_, l) = build_model(s, &p).unwrap();
    let rho = steady_state(&l).unwrap();
    let fixed = g2_tau(&l, &rho, &PropagationSpec::fixed_rk4(1.0, 0.01, g)).unwrap();
    let adaptive = g2_tau(
        &l,
        &rho,
        &PropagationSpec::adaptive(1.0, 0.01, 1e-11, 1e-13),
    )
    .unwrap();
    let worst = fixed
        .values
        .iter()
        .zip(&adaptive.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn delayed_correlations_decorrelate() {
    // Two detections at t and one at t + τ: for large τ the third photon is
    // uncorrelated, so g3(τ) → ⟨a†²a²⟩⟨a†a⟩ / ⟨a†a⟩³ = g2(0), while g2(τ) → 1.
    let s = make_space(8).unwrap();
    let p = SystemParams::two_photon_resonance(15.0, 0.0, 1.0);
    let (_, l) = build_model(s, &p).unwrap();
    let rho = steady_state(&l).unwrap();
    let spec = PropagationSpec::adaptive(20.0, 0.5, 1e-10, 1e-12);
    let g2 = g2_tau(&l, &rho, &spec).unwrap();
    let g3 = g3_tau(&l, &rho, &spec).unwrap();
    let g2_0 = g2_zero(&rho).unwrap();
    assert!((g2.at(20.0).unwrap() - 1.0).abs() < 0.05);
    assert!((g3.at(20.0).unwrap() - g2_0).abs() < 0.05 * g2_0);
}

#[test]
fn conditional_state_normalization() {
    let s = make_space(4).unwrap();
    let (cond, norm) =
        conditional_state(&DensityMatrix::fock(s, 3).unwrap(), &annihilation(s), 2).unwrap();
    assert!((norm - 6.0).abs() < 1e-12);
    assert!((cond.trace().re - 6.0).abs() < 1e-12);
    assert!(matches!(
        conditional_state(&DensityMatrix::vacuum(s), &annihilation(s), 1),
        Err(Error::NoDetectablePhotons { .. })
    ));
}

/// Eigenvalues of the full Hamiltonian (η = 0, Δ = 0) restricted to the
/// basis states with exactly `k` excitations.
fn excitation_subspace_eigenvalues(g: f64, phi: f64, k: usize) -> Vec<f64> {
    let s = make_space(k + 1).unwrap();
    let h = build_hamiltonian(s, &SystemParams::new(g, phi, 0.0, 0.0)).unwrap();
    let idx: Vec<usize> = (0..s.dim()).filter(|&i| s.excitations(i) == k).collect();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| h.matrix()[(idx[r], idx[c])]);
    let mut ev: Vec<f64> = sub.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn hamiltonian_manifolds_follow_the_collective_ladder() {
    for phi in [0.0, PI] {
        for k in 1..=3 {
            let ev = excitation_subspace_eigenvalues(1.0, phi, k);
            let r = (2.0 * (2 * k - 1) as f64).sqrt();
            let zeros = ev.len() - 2;
            assert!((ev[0] + r).abs() < 1e-12 && (ev[ev.len() - 1] - r).abs() < 1e-12);
            assert!(ev[1..1 + zeros].iter().all(|e| e.abs() < 1e-12), "{ev:?}");
        }
    }
}
