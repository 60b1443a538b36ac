//! The `ρ`-invariant symplectic complement `V = ⟨v, X_H(x)⟩^ω`, its adapted
//! basis, and the return map restricted to it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::darwin::{validate_darwin, ReturnMapBlocks};
use crate::error::{Error, Result};
use crate::linalg::{inverse_guarded, null_space, orthonormal_frame, singular_values, standard_j, Matrix, Vector};
use crate::orbit::integrate::integrate_with_variations;
use crate::orbit::shooting::{check_fixed_point, eigenspaces, SymmetricOrbit};
use crate::orbit::systems::HamiltonianSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct TransverseSection {
    /// `e₁..eₙ` spanning `L₊ = V ∩ Fix(ρ)`, as columns.
    pub basis_plus: Matrix,
    /// `f₁..fₙ` spanning `L₋`, normalized by `ω(eᵢ, fⱼ) = δᵢⱼ`.
    pub basis_minus: Matrix,
    pub v_aux: Vector,
    /// `S = [e₁ … eₙ f₁ … fₙ]`, mapping section coordinates into phase space.
    pub symplectic_basis_matrix: Matrix,
}

impl TransverseSection {
    /// `P = −J₂ₙ Sᵀ J`: coordinates in the section basis, projecting along
    /// `span{v, X_H(x)}`.
    pub fn projection(&self) -> Matrix {
        let s = &self.symplectic_basis_matrix;
        let n = s.ncols() / 2;
        let j_full = standard_j(s.nrows() / 2);
        -(standard_j(n) * s.transpose() * j_full)
    }
}

/// Attempts at drawing `w` before giving up.
pub const TRANSVERSAL_ATTEMPTS: usize = 32;

/// Relative size `|dH(x)v| / (‖∇H‖‖v‖)` required of the transversal.
pub const TRANSVERSALITY: f64 = 1e-6;

pub fn build_transverse_section(sys: &dyn HamiltonianSystem, orbit: &SymmetricOrbit) -> Result<TransverseSection> {
    build_transverse_section_seeded(sys, orbit, 0)
}

pub fn build_transverse_section_seeded(
    sys: &dyn HamiltonianSystem,
    orbit: &SymmetricOrbit,
    seed: u64,
) -> Result<TransverseSection> {
    let x = orbit.point();
    check_fixed_point(sys, &x)?;
    let dim = sys.dim();
    let rho = sys.involution();
    let j = standard_j(dim / 2);
    let grad = sys.gradient(&x);
    let field = &j * &grad;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = None;
    for _ in 0..TRANSVERSAL_ATTEMPTS {
        let w = Vector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        let candidate = &w + &rho * &w;
        let norm = candidate.norm();
        if norm > 0.0 && grad.dot(&candidate).abs() > TRANSVERSALITY * grad.norm() * norm {
            v = Some(candidate / norm);
            break;
        }
    }
    let v = v.ok_or(Error::DegenerateTransversal)?;

    // V = {y : ω(v, y) = ω(X_H, y) = 0}.
    let mut constraints = Matrix::zeros(2, dim);
    constraints.set_row(0, &(v.transpose() * &j));
    constraints.set_row(1, &(field.transpose() * &j));
    let scale = constraints.amax();
    let (fix, anti) = eigenspaces(&rho);
    let restrict = |basis: &Matrix| -> Matrix {
        let kernel = null_space(&(&constraints * basis), 1e-9 * scale);
        orthonormal_frame(&(basis * kernel))
    };
    let e = restrict(&fix);
    let g = restrict(&anti);
    if e.ncols() != g.ncols() || 2 * e.ncols() + 2 != dim {
        return Err(Error::UnequalEigenspaces { plus: e.ncols(), minus: g.ncols() });
    }
    let pairing = e.transpose() * &j * &g;
    let f = &g * inverse_guarded(&pairing).map_err(|_| Error::UnequalEigenspaces { plus: e.ncols(), minus: g.ncols() })?;
    let mut s = Matrix::zeros(dim, 2 * e.ncols());
    s.view_mut((0, 0), e.shape()).copy_from(&e);
    s.view_mut((0, e.ncols()), f.shape()).copy_from(&f);
    Ok(TransverseSection { basis_plus: e, basis_minus: f, v_aux: v, symplectic_basis_matrix: s })
}

/// Darwin residual bound for reduced return maps.
pub const REDUCTION_TOL: f64 = 1e-6;

/// `Φ = P · dφ^η(x) · S` in the section basis.
pub fn reduced_monodromy(
    sys: &dyn HamiltonianSystem,
    orbit: &SymmetricOrbit,
    section: &TransverseSection,
    tol: f64,
) -> Result<ReturnMapBlocks> {
    let flow = integrate_with_variations(sys, &orbit.point(), orbit.eta, tol)?;
    reduce(&flow.fundamental, section)
}

/// Reduction of a given full monodromy matrix.
pub fn reduce(monodromy: &Matrix, section: &TransverseSection) -> Result<ReturnMapBlocks> {
    let s = &section.symplectic_basis_matrix;
    let sv = singular_values(s);
    let cond = sv.max() / sv.min();
    if !(cond < 1e8) {
        return Err(Error::ProjectionIllConditioned(cond));
    }
    let phi = section.projection() * monodromy * s;
    let blocks = ReturnMapBlocks::from_matrix(&phi)?;
    let report = validate_darwin(&blocks, REDUCTION_TOL)?;
    if !report.passes {
        return Err(Error::InvalidBlocks(format!(
            "reduced map misses the return-map identities by {:e}",
            report.residuals.max()
        )));
    }
    Ok(blocks)
}
