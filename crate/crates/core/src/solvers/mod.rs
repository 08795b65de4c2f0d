//! Numerical kernels: stationary states and time propagation.

mod banded;
pub mod propagate;
pub mod steady;

pub use propagate::{
    conditional_state, propagate, propagate_with, Method, PropagationSpec, TimeSeries,
};
pub use steady::{steady_state, steady_state_with_residual, SteadyState, STEADY_RESIDUAL_TOL};
