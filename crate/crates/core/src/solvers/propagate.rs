//! Time propagation of (possibly unnormalized) density matrices under a
//! fixed Liouvillian.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{sandwich, DensityMatrix, Operator, HERMITICITY_TOL};
use crate::model::Liouvillian;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FixedRk4,
    Adaptive,
}

/// Output grid and integrator settings. Times are in units of 1/κ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationSpec {
    pub t_max: f64,
    pub dt_out: f64,
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the internal RK4 step.
    pub max_step: f64,
}

/// Internal steps per period of the fastest dressed oscillation 2√2·g are at
/// least `2π / 0.02 ≈ 314`.
const FAST_PERIOD_FRACTION: f64 = 0.02;

/// RK4 is stable for |hλ| ≲ 2.78 on the negative real axis.
const RK4_STABILITY: f64 = 2.5;

impl PropagationSpec {
    /// Fixed-step RK4 with the step bound `min(dt_out, 0.02 / (2√2·g))`.
    pub fn fixed_rk4(t_max: f64, dt_out: f64, g: f64) -> Self {
        let fast = 2.0 * 2f64.sqrt() * g;
        let bound = if fast > 0.0 {
            FAST_PERIOD_FRACTION / fast
        } else {
            f64::INFINITY
        };
        Self {
            t_max,
            dt_out,
            method: Method::FixedRk4,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: dt_out.min(bound),
        }
    }

    pub fn adaptive(t_max: f64, dt_out: f64, rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            t_max,
            dt_out,
            method: Method::Adaptive,
            rel_tol,
            abs_tol,
            max_step: dt_out,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.dt_out) {
            return Err(Error::InvalidArgument(format!(
                "dt_out must be positive, got {}",
                self.dt_out
            )));
        }
        if !self.t_max.is_finite() || self.t_max < self.dt_out {
            return Err(Error::InvalidArgument(format!(
                "t_max ({}) must be >= dt_out ({})",
                self.t_max, self.dt_out
            )));
        }
        if !ok(self.max_step) || !ok(self.rel_tol) || !ok(self.abs_tol) {
            return Err(Error::InvalidArgument(
                "step bound and tolerances must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of output samples including t = 0.
    pub fn samples(&self) -> usize {
        (self.t_max / self.dt_out + 1e-9).floor() as usize + 1
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples())
            .map(|k| k as f64 * self.dt_out)
            .collect()
    }
}

/// Sampled trajectory `ρ(t_k)`.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

/// Propagate and keep every output sample.
pub fn propagate(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    spec: &PropagationSpec,
) -> Result<TimeSeries> {
    let space = l.space();
    let mut times = Vec::with_capacity(spec.samples());
    let mut states = Vec::with_capacity(spec.samples());
    propagate_with(l, rho0, spec, |t, v| {
        times.push(t);
        states.push(DensityMatrix::from_vec(space, v).expect("length fixed by the Liouvillian"));
    })?;
    Ok(TimeSeries { times, states })
}

/// Propagate, handing each output sample `(t, vec(ρ(t)))` to `visit`
/// without storing the trajectory.
pub fn propagate_with<F>(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    spec: &PropagationSpec,
    visit: F,
) -> Result<()>
where
    F: FnMut(f64, &[C64]),
{
    spec.validate()?;
    if rho0.space() != l.space() {
        return Err(Error::SpaceMismatch {
            left: l.space().n_max(),
            right: rho0.space().n_max(),
        });
    }
    let herm = rho0.hermiticity_error();
    if herm > HERMITICITY_TOL {
        return Err(Error::InvalidArgument(format!(
            "initial state is not Hermitian (max |ρ-ρ†| = {herm:.3e})"
        )));
    }
    match spec.method {
        Method::FixedRk4 => rk4(l, rho0.as_vec(), spec, visit),
        Method::Adaptive => dopri5(l, rho0.as_vec(), spec, visit),
    }
}

#[inline]
fn axpy_into(out: &mut [C64], y: &[C64], h: f64, k: &[C64]) {
    for ((o, yi), ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + ki * h;
    }
}

fn rk4<F: FnMut(f64, &[C64])>(
    l: &Liouvillian,
    y0: &[C64],
    spec: &PropagationSpec,
    mut visit: F,
) -> Result<()> {
    let n = y0.len();
    let stable = RK4_STABILITY / l.spectral_bound().max(f64::MIN_POSITIVE);
    let h_max = spec.max_step.min(stable);
    let substeps = (spec.dt_out / h_max).ceil().max(1.0) as usize;
    let h = spec.dt_out / substeps as f64;

    let zero = C64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut tmp = vec![zero; n];

    visit(0.0, &y);
    for s in 1..spec.samples() {
        for _ in 0..substeps {
            l.apply_into(&y, &mut k1);
            axpy_into(&mut tmp, &y, 0.5 * h, &k1);
            l.apply_into(&tmp, &mut k2);
            axpy_into(&mut tmp, &y, 0.5 * h, &k2);
            l.apply_into(&tmp, &mut k3);
            axpy_into(&mut tmp, &y, h, &k3);
            l.apply_into(&tmp, &mut k4);
            let w = h / 6.0;
            for i in 0..n {
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
            }
        }
        let t = s as f64 * spec.dt_out;
        if !y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Integration {
                t,
                reason: "state diverged".into(),
            });
        }
        visit(t, &y);
    }
    Ok(())
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn dopri5<F: FnMut(f64, &[C64])>(
    l: &Liouvillian,
    y0: &[C64],
    spec: &PropagationSpec,
    mut visit: F,
) -> Result<()> {
    let n = y0.len();
    let zero = C64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![zero; n]).collect();
    let mut stage = vec![zero; n];
    let mut y_new = vec![zero; n];

    let mut t = 0.0;
    let mut h = (spec.max_step).min(1.0 / l.spectral_bound().max(1e-300));
    l.apply_into(&y, &mut k[0]);
    visit(0.0, &y);

    for s in 1..spec.samples() {
        let target = s as f64 * spec.dt_out;
        while t < target - 1e-14 * target.max(1.0) {
            let step = h.min(target - t).min(spec.max_step);
            if step < 1e-14 * t.max(1.0) {
                return Err(Error::Integration {
                    t,
                    reason: format!("step size underflow (h = {step:.3e})"),
                });
            }
            let combos: [&[f64]; 5] = [
                &[A21],
                &[A31, A32],
                &[A41, A42, A43],
                &[A51, A52, A53, A54],
                &[A61, A62, A63, A64, A65],
            ];
            for (si, coeffs) in combos.iter().enumerate() {
                let (done, rest) = k.split_at_mut(si + 1);
                for i in 0..n {
                    let mut acc = y[i];
                    for (kj, a) in done.iter().zip(coeffs.iter()) {
                        acc += kj[i] * (a * step);
                    }
                    stage[i] = acc;
                }
                l.apply_into(&stage, &mut rest[0]);
            }
            for i in 0..n {
                y_new[i] = y[i]
                    + (k[0][i] * B1 + k[2][i] * B3 + k[3][i] * B4 + k[4][i] * B5 + k[5][i] * B6)
                        * step;
            }
            l.apply_into(&y_new, &mut k[6]);

            let mut err: f64 = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1
                    + k[2][i] * E3
                    + k[3][i] * E4
                    + k[4][i] * E5
                    + k[5][i] * E6
                    + k[6][i] * E7)
                    * step;
                let sc = spec.abs_tol + spec.rel_tol * y[i].norm().max(y_new[i].norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }
            if err <= 1.0 {
                t += step;
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = step * factor;
        }
        t = target;
        visit(target, &y);
    }
    Ok(())
}

/// Post-detection state `Jᵏ ρ J†ᵏ` for `k = order ∈ {1, 2}` and its trace.
pub fn conditional_state(
    rho: &DensityMatrix,
    jump: &Operator,
    order: u32,
) -> Result<(DensityMatrix, f64)> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "detection order must be 1 or 2, got {order}"
        )));
    }
    let j = jump.power(order);
    let out = sandwich(&j, rho, &j.adjoint())?;
    let norm = out.trace().re;
    if norm < 1e-14 {
        return Err(Error::NoDetectablePhotons { norm });
    }
    Ok((out, norm))
}
