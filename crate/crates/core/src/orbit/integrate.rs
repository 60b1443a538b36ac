//! Flow and variational equation `Ṁ = J ∇²H(x) M`, integrated together with
//! DOP853.

use ode_solvers::dop853::Dop853;
use ode_solvers::dop_shared::{IntegrationError, OutputType};
use ode_solvers::System;

use crate::error::{Error, Result};
use crate::linalg::{standard_j, symplectic_residual, Matrix, Vector};
use crate::orbit::systems::HamiltonianSystem;

#[derive(Debug, Clone)]
pub struct Flow {
    /// Accepted step times and states (without the variational part).
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub fundamental: Matrix,
    pub energy_drift: f64,
    /// `‖MᵀJM − J‖∞` of the final fundamental matrix; monitored only.
    pub symplectic_residual: f64,
}

impl Flow {
    pub fn end(&self) -> &Vector {
        self.states.last().expect("flow has at least the initial state")
    }
}

struct Variational<'a> {
    sys: &'a dyn HamiltonianSystem,
    j: Matrix,
}

impl System<f64, Vector> for Variational<'_> {
    fn system(&self, _t: f64, y: &Vector, dy: &mut Vector) {
        let dim = self.sys.dim();
        let x = y.rows(0, dim).into_owned();
        let m = Matrix::from_column_slice(dim, dim, &y.as_slice()[dim..]);
        let xdot = &self.j * self.sys.gradient(&x);
        let mdot = &self.j * self.sys.hessian(&x) * m;
        dy.rows_mut(0, dim).copy_from(&xdot);
        dy.as_mut_slice()[dim..].copy_from_slice(mdot.as_slice());
    }
}

/// Step budget for one integration.
const MAX_STEPS: u32 = 1_000_000;

/// Integrates `x0` and the fundamental matrix over `[0, t]` with relative
/// and absolute step tolerance `tol / 100`; energy drift beyond `10·tol` is
/// an error.
pub fn integrate_with_variations(sys: &dyn HamiltonianSystem, x0: &Vector, t: f64, tol: f64) -> Result<Flow> {
    let dim = sys.dim();
    if x0.len() != dim {
        return Err(Error::DimensionMismatch(format!("state has {} coordinates, system {dim}", x0.len())));
    }
    if !(tol > 0.0) || !t.is_finite() || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if t == 0.0 {
        return Ok(Flow {
            times: vec![0.0],
            states: vec![x0.clone()],
            fundamental: Matrix::identity(dim, dim),
            energy_drift: 0.0,
            symplectic_residual: 0.0,
        });
    }
    let mut y0 = Vector::zeros(dim + dim * dim);
    y0.rows_mut(0, dim).copy_from(x0);
    for i in 0..dim {
        y0[dim + i * dim + i] = 1.0;
    }
    let step_tol = (tol / 100.0).max(1e-15);
    let system = Variational { sys, j: standard_j(dim / 2) };
    let mut solver = Dop853::from_param(
        system, 0.0, t, t, y0, step_tol, step_tol, 0.9, 0.0, 0.333, 6.0, t.abs(), 0.0, MAX_STEPS, 1000,
        OutputType::Sparse,
    );
    solver.integrate().map_err(|e| match e {
        IntegrationError::MaxNumStepReached { x, n_step } => {
            Error::StepFailure(format!("step budget of {n_step} exhausted at t = {x}"))
        }
        IntegrationError::StepSizeUnderflow { x } => Error::StepFailure(format!("step size underflow at t = {x}")),
        IntegrationError::StiffnessDetected { x } => Error::StepFailure(format!("stiffness detected at t = {x}")),
    })?;
    let (ts, ys) = solver.results().get();
    let last = ys.last().ok_or_else(|| Error::StepFailure("no output".into()))?;
    if last.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let states: Vec<Vector> = ys.iter().map(|y| y.rows(0, dim).into_owned()).collect();
    let h0 = sys.hamiltonian(x0);
    let energy_drift = states.iter().map(|x| (sys.hamiltonian(x) - h0).abs()).fold(0.0, f64::max);
    let limit = 10.0 * tol * h0.abs().max(1.0);
    if energy_drift > limit {
        return Err(Error::EnergyDriftExceeded { drift: energy_drift, limit });
    }
    let fundamental = Matrix::from_column_slice(dim, dim, &last.as_slice()[dim..]);
    let symplectic_residual = symplectic_residual(&fundamental)?;
    Ok(Flow { times: ts.clone(), states, fundamental, energy_drift, symplectic_residual })
}

/// `φᵗ(x0)` alone, at the same tolerances.
pub fn flow_point(sys: &dyn HamiltonianSystem, x0: &Vector, t: f64, tol: f64) -> Result<Vector> {
    integrate_with_variations(sys, x0, t, tol).map(|f| f.end().clone())
}
