//! Shooting for symmetric periodic orbits: an orbit through `x ∈ Fix(ρ)`
//! that meets `Fix(ρ)` again at time `τ` closes up after `η = 2τ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{null_space, svd, Matrix, Vector};
use crate::orbit::integrate::integrate_with_variations;
use crate::orbit::systems::HamiltonianSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricOrbit {
    pub x: Vec<f64>,
    pub eta: f64,
    pub energy: f64,
    /// `‖φ^η(x) − x‖∞`.
    pub residual: f64,
}

impl SymmetricOrbit {
    pub fn point(&self) -> Vector {
        Vector::from_column_slice(&self.x)
    }
}

pub const MAX_NEWTON_ITERATIONS: usize = 50;

/// Orthonormal bases of the `+1` and `−1` eigenspaces of `ρ`.
pub fn eigenspaces(rho: &Matrix) -> (Matrix, Matrix) {
    let dim = rho.nrows();
    let id = Matrix::identity(dim, dim);
    (null_space(&(rho - &id), 1e-10), null_space(&(rho + &id), 1e-10))
}

pub fn check_fixed_point(sys: &dyn HamiltonianSystem, x: &Vector) -> Result<()> {
    if x.len() != sys.dim() {
        return Err(Error::DimensionMismatch(format!("point has {} coordinates, system {}", x.len(), sys.dim())));
    }
    let deviation = (sys.involution() * x - x).amax();
    if deviation > 1e-12 * x.amax().max(1.0) {
        return Err(Error::NotOnFixedSet(deviation));
    }
    if sys.gradient(x).amax() <= 1e-12 {
        return Err(Error::CriticalPoint);
    }
    Ok(())
}

/// Newton iteration in the unknowns `(ξ, τ)`, `x = seed + E₊ξ`, on
/// `E₋ᵀ φ^τ(x) = 0` and `H(x) = E`, solved in the least-squares sense so
/// that degenerate (resonant) orbits still converge.
pub fn find_symmetric_orbit(
    sys: &dyn HamiltonianSystem,
    seed: &Vector,
    half_period_guess: f64,
    tol: f64,
) -> Result<SymmetricOrbit> {
    check_fixed_point(sys, seed)?;
    if !(half_period_guess > 0.0) || !half_period_guess.is_finite() {
        return Err(Error::MalformedInput("half-period guess must be positive".into()));
    }
    let (e_plus, e_minus) = eigenspaces(&sys.involution());
    let target = sys.energy_level().unwrap_or_else(|| sys.hamiltonian(seed));
    let residual_of = |x: &Vector, tau: f64| -> Result<(Vector, Matrix, Vector)> {
        let flow = integrate_with_variations(sys, x, tau, tol)?;
        let y = flow.end().clone();
        let mut f = Vector::zeros(e_minus.ncols() + 1);
        f.rows_mut(0, e_minus.ncols()).copy_from(&(e_minus.transpose() * &y));
        f[e_minus.ncols()] = sys.hamiltonian(x) - target;
        Ok((f, flow.fundamental, y))
    };

    let mut x = seed.clone();
    let mut tau = half_period_guess;
    let (mut f, mut m, mut y) = residual_of(&x, tau)?;
    let mut iterations = 0;
    while f.amax() > tol {
        if iterations == MAX_NEWTON_ITERATIONS {
            return Err(Error::NoConvergence { iterations, residual: f.amax() });
        }
        iterations += 1;
        check_fixed_point(sys, &x)?;
        let rows = e_minus.ncols() + 1;
        let cols = e_plus.ncols() + 1;
        let mut jac = Matrix::zeros(rows, cols);
        jac.view_mut((0, 0), (rows - 1, cols - 1)).copy_from(&(e_minus.transpose() * &m * &e_plus));
        jac.view_mut((rows - 1, 0), (1, cols - 1)).copy_from(&(sys.gradient(&x).transpose() * &e_plus));
        jac.view_mut((0, cols - 1), (rows - 1, 1)).copy_from(&(e_minus.transpose() * sys.vector_field(&y)));
        let d = svd(&jac);
        let step = d.solve(&f, 1e-10 * d.singular_values.max());

        let mut lambda = 1.0;
        loop {
            let x_new = &x - (&e_plus * step.rows(0, cols - 1)) * lambda;
            let tau_new = tau - step[cols - 1] * lambda;
            if tau_new > 0.0 {
                if let Ok((f_new, m_new, y_new)) = residual_of(&x_new, tau_new) {
                    if f_new.amax() < f.amax() || lambda < 1e-3 {
                        x = x_new;
                        tau = tau_new;
                        f = f_new;
                        m = m_new;
                        y = y_new;
                        break;
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1e-3 {
                return Err(Error::NoConvergence { iterations, residual: f.amax() });
            }
        }
    }
    // Snap back onto Fix(ρ) exactly; the iterate only drifts by rounding.
    let x = &e_plus * (e_plus.transpose() * &x);
    let eta = 2.0 * tau;
    let closed = integrate_with_variations(sys, &x, eta, tol)?;
    let residual = (closed.end() - &x).amax();
    if residual > 1e3 * tol {
        return Err(Error::NoConvergence { iterations, residual });
    }
    Ok(SymmetricOrbit { x: x.iter().copied().collect(), eta, energy: sys.hamiltonian(&x), residual })
}

/// First return time to `Fix(ρ)`: the first clear local minimum of
/// `‖E₋ᵀ φᵗ(x)‖` on a grid of spacing `dt` in `(0, t_max]`.
pub fn estimate_half_period(sys: &dyn HamiltonianSystem, x: &Vector, t_max: f64, dt: f64, tol: f64) -> Result<f64> {
    check_fixed_point(sys, x)?;
    let (_, e_minus) = eigenspaces(&sys.involution());
    let steps = (t_max / dt).ceil() as usize;
    let mut state = x.clone();
    let mut prev2 = 0.0;
    let mut prev = 0.0;
    let mut peak: f64 = 0.0;
    for i in 1..=steps {
        state = integrate_with_variations(sys, &state, dt, tol)?.end().clone();
        let d = (e_minus.transpose() * &state).norm();
        if i >= 2 && prev <= prev2 && prev <= d && prev < 0.1 * peak {
            return Ok((i - 1) as f64 * dt);
        }
        peak = peak.max(d);
        prev2 = prev;
        prev = d;
    }
    Err(Error::NoConvergence { iterations: steps, residual: prev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::systems::{AnisotropicOscillator, HenonHeiles};
    use std::f64::consts::PI;

    #[test]
    fn oscillator_normal_mode() {
        let sys = AnisotropicOscillator { w1: 1.0, w2: 2f64.sqrt() };
        let seed = Vector::from_vec(vec![0.5, 0.0, 0.0, 0.0]);
        let orbit = find_symmetric_orbit(&sys, &seed, 3.0, 1e-12).unwrap();
        assert!((orbit.eta - 2.0 * PI).abs() <= 1e-9);
        assert!(orbit.residual <= 1e-10);
        assert!((orbit.x[0] - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn rejects_points_off_the_fixed_set() {
        let sys = AnisotropicOscillator { w1: 1.0, w2: 2.0 };
        let seed = Vector::from_vec(vec![0.5, 0.1, 0.0, 0.0]);
        assert!(matches!(find_symmetric_orbit(&sys, &seed, 3.0, 1e-10), Err(Error::NotOnFixedSet(_))));
        let origin = Vector::zeros(4);
        assert!(matches!(find_symmetric_orbit(&sys, &origin, 3.0, 1e-10), Err(Error::CriticalPoint)));
    }

    #[test]
    fn henon_heiles_vertical_orbit() {
        let sys = HenonHeiles { energy: 1.0 / 12.0 };
        let seed = Vector::from_vec(vec![0.0, 0.5, 0.0, 0.0]);
        let orbit = find_symmetric_orbit(&sys, &seed, PI, 1e-11).unwrap();
        assert!(orbit.residual <= 1e-8);
        assert!((orbit.energy - 1.0 / 12.0).abs() <= 1e-11);
        assert!(orbit.eta > 6.0 && orbit.eta < 7.5, "eta = {}", orbit.eta);
    }

    #[test]
    fn half_period_estimate() {
        let sys = AnisotropicOscillator { w1: 1.0, w2: 2f64.sqrt() };
        let seed = Vector::from_vec(vec![0.5, 0.0, 0.0, 0.0]);
        let t = estimate_half_period(&sys, &seed, 20.0, 0.05, 1e-10).unwrap();
        assert!((t - PI).abs() <= 0.05);
    }
}
