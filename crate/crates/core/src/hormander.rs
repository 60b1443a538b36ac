//! The closed formula for the Hörmander index of iterates, and the
//! quadratic-form oracle that computes the same index from first principles.

use serde::{Deserialize, Serialize};

use crate::chebyshev::cheb_pair;
use crate::darwin::{default_det_threshold, ReturnMapBlocks};
use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;
use crate::linalg::{
    block_diag, check_square, inertia, inf_norm, inverse_guarded, max_abs, solve_guarded,
    singular_values, standard_j, Inertia, Matrix, Vector, DEFAULT_ZERO_REL_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Formula,
    QuadraticForm,
    PathDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub k: usize,
    pub method: Method,
    pub s: HalfInteger,
    /// Inertia of the sign matrix (formula) or of `Q(Δ, Gr Φ; L×L)`
    /// (quadratic form). Absent for the path method.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inertia: Option<Inertia>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_cz: Option<HalfInteger>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_l: Option<HalfInteger>,
}

/// Relative asymmetry accepted in the sign matrix before symmetrizing.
pub const SIGN_MATRIX_ASYMMETRY: f64 = 1e-7;

/// Smallest singular value, relative to `‖Φ‖∞^{k−1}`, below which `C` or
/// `U_{k−1}(A)` counts as singular.
pub const SINGULAR_REL: f64 = 1e-10;

/// `(M + Mᵀ)/2` for `M = (I − T_k(A)) U_{k−1}(A)⁻¹ C⁻¹`.
pub fn hormander_sign_matrix(blocks: &ReturnMapBlocks, k: usize) -> Result<Matrix> {
    if k == 0 {
        return Err(Error::InvalidBlocks("iterate index must be at least 1".into()));
    }
    let n = blocks.n();
    let scale = inf_norm(&blocks.assemble()).max(1.0);
    if singular_values(&blocks.c).min() <= SINGULAR_REL * scale {
        return Err(Error::CSingular { det: blocks.c.determinant() });
    }
    let c_inv = inverse_guarded(&blocks.c).map_err(|_| Error::CSingular {
        det: blocks.c.determinant(),
    })?;
    let (t_k, u_km1) = cheb_pair(k, &blocks.a)?;
    if singular_values(&u_km1).min() <= SINGULAR_REL * scale.powi(k as i32 - 1) {
        return Err(Error::IterateDegenerate { k });
    }
    let u_inv = inverse_guarded(&u_km1).map_err(|_| Error::IterateDegenerate { k })?;
    let m = (Matrix::identity(n, n) - t_k) * u_inv * c_inv;
    let asymmetry = inf_norm(&(&m - m.transpose()));
    let tol = SIGN_MATRIX_ASYMMETRY * inf_norm(&m);
    if asymmetry > tol {
        return Err(Error::AsymmetryTooLarge { asymmetry, tol });
    }
    Ok((&m + m.transpose()) * 0.5)
}

/// `s(x, kη) = ½ sign((I − T_k(A)) U_{k−1}(A)⁻¹ C⁻¹)`.
///
/// `tol` is relative: eigenvalues within `tol · ‖M‖∞` of zero make the
/// form degenerate.
pub fn hormander_index_formula(
    blocks: &ReturnMapBlocks,
    k: usize,
    tol: f64,
) -> Result<IndexResult> {
    let m = hormander_sign_matrix(blocks, k)?;
    let zero_tol = tol * inf_norm(&m);
    let inertia = inertia(&m, zero_tol)?;
    if inertia.n_zero > 0 {
        return Err(Error::DegenerateForm { n_zero: inertia.n_zero, tol: zero_tol });
    }
    Ok(IndexResult {
        k,
        method: Method::Formula,
        s: HalfInteger::half_of(inertia.signature()),
        inertia: Some(inertia),
        mu_cz: None,
        mu_l: None,
    })
}

/// Matrix of `Ω = (−ω) × ω` on `ℝ²ⁿ × ℝ²ⁿ`.
pub fn product_form(n: usize) -> Matrix {
    let j = standard_j(n);
    block_diag(&(-&j), &j)
}

/// Frame of the diagonal `Δ ⊂ ℝ²ⁿ × ℝ²ⁿ`.
pub fn diagonal_frame(n: usize) -> Matrix {
    let id = Matrix::identity(2 * n, 2 * n);
    let mut f = Matrix::zeros(4 * n, 2 * n);
    f.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&id);
    f.view_mut((2 * n, 0), (2 * n, 2 * n)).copy_from(&id);
    f
}

/// Frame of `L = ℝⁿ × {0}`.
pub fn horizontal_frame(n: usize) -> Matrix {
    let mut f = Matrix::zeros(2 * n, n);
    f.view_mut((0, 0), (n, n)).fill_with_identity();
    f
}

/// Frame of `L × L` for `L = ℝⁿ × {0}`.
pub fn horizontal_product_frame(n: usize) -> Matrix {
    let l = horizontal_frame(n);
    block_diag(&l, &l)
}

/// Columns `v(e_i)` of the map `u ↦ v(u)` defined by
/// `(u + v, u + Φv) ∈ W`, solved generically for a Lagrangian `W` given by
/// a frame.
pub fn duistermaat_transfer(phi: &Matrix, w_frame: &Matrix) -> Result<Matrix> {
    let dim = check_square(phi)?;
    if dim % 2 != 0 {
        return Err(Error::OddDimension(dim));
    }
    let n = dim / 2;
    if w_frame.nrows() != 2 * dim || w_frame.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "Lagrangian frame must be {}x{dim}, found {}x{}",
            2 * dim,
            w_frame.nrows(),
            w_frame.ncols()
        )));
    }
    // W is Lagrangian, so it is the annihilator of itself under Ω.
    let annihilator = w_frame.transpose() * product_form(n);
    let mut graph = Matrix::zeros(2 * dim, dim);
    graph.view_mut((0, 0), (dim, dim)).fill_with_identity();
    graph.view_mut((dim, 0), (dim, dim)).copy_from(phi);
    let lhs = &annihilator * &graph;
    let rhs = -(&annihilator * diagonal_frame(n));
    solve_guarded(&lhs, &rhs)
}

/// Gram matrix of `Q(Δ, Gr Φ; W)(z, z') = Ω(z, Γz')` on the basis
/// `z_i = (e_i, e_i)` of `Δ`, where `Γ(u, u) = (v(u), Φ v(u))`.
pub fn duistermaat_form(phi: &Matrix, w_frame: &Matrix) -> Result<Matrix> {
    let dim = phi.nrows();
    let v = duistermaat_transfer(phi, w_frame)?;
    let mut gamma = Matrix::zeros(2 * dim, dim);
    gamma.view_mut((0, 0), (dim, dim)).copy_from(&v);
    gamma.view_mut((dim, 0), (dim, dim)).copy_from(&(phi * &v));
    let n = dim / 2;
    Ok(diagonal_frame(n).transpose() * product_form(n) * gamma)
}

/// `dim(Δ ∩ W)` from the rank of the stacked frames.
fn diagonal_intersection_dim(w_frame: &Matrix, n: usize) -> usize {
    let dim = 2 * n;
    let mut stacked = Matrix::zeros(2 * dim, 2 * dim);
    stacked.view_mut((0, 0), (2 * dim, dim)).copy_from(&diagonal_frame(n));
    stacked.view_mut((0, dim), (2 * dim, dim)).copy_from(&crate::linalg::orthonormal_frame(w_frame));
    let sv = singular_values(&stacked);
    let smax = sv.max();
    let rank = sv.iter().filter(|s| **s > 1e-10 * smax).count();
    2 * dim - rank
}

/// Inertia of a form whose kernel must be exactly `expected_kernel`-dimensional.
fn form_inertia(q: &Matrix, zero_tol: f64, expected_kernel: usize, tol: f64) -> Result<Inertia> {
    let asymmetry = inf_norm(&(q - q.transpose()));
    if asymmetry > tol * inf_norm(q).max(1.0) {
        return Err(Error::QNotSymmetric { asymmetry });
    }
    let inertia = inertia(q, zero_tol)?;
    if inertia.n_zero != expected_kernel {
        return Err(Error::DegenerateForm { n_zero: inertia.n_zero, tol: zero_tol });
    }
    Ok(inertia)
}

/// `s(L×L, Δ; Δ, Gr Φ) = −s(Δ, Gr Φ; L×L, Δ)
///  = −½ (sign Q(Δ, Gr Φ; L×L) − sign Q(Δ, Gr Φ; Δ))`, `L = ℝⁿ × {0}`,
/// computed without the block formula.
pub fn hormander_index_quadratic_form(phi: &Matrix, tol: f64) -> Result<IndexResult> {
    let dim = check_square(phi)?;
    if dim % 2 != 0 {
        return Err(Error::OddDimension(dim));
    }
    let n = dim / 2;
    let det = (phi - Matrix::identity(dim, dim)).determinant();
    if !(det.abs() > default_det_threshold(inf_norm(phi), 1)) {
        return Err(Error::NotTransverse { det });
    }
    let ll = horizontal_product_frame(n);
    let diag = diagonal_frame(n);
    let q_ll = duistermaat_form(phi, &ll)?;
    let q_diag = duistermaat_form(phi, &diag)?;
    let zero_tol = tol * inf_norm(&q_ll).max(1.0);
    let in_ll = form_inertia(&q_ll, zero_tol, diagonal_intersection_dim(&ll, n), tol)?;
    let in_diag = form_inertia(&q_diag, zero_tol, diagonal_intersection_dim(&diag, n), tol)?;
    let s = -(HalfInteger::half_of(in_ll.signature()) - HalfInteger::half_of(in_diag.signature()));
    Ok(IndexResult {
        k: 1,
        method: Method::QuadraticForm,
        s,
        inertia: Some(in_ll),
        mu_cz: None,
        mu_l: None,
    })
}

/// Default relative tolerance for the index computations.
pub const DEFAULT_TOL: f64 = DEFAULT_ZERO_REL_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormV {
    /// `v(u) = ((A − I)C⁻¹u₂, −u₂)`.
    pub v: Vector,
    /// `Φ v(u) = ((I − A)C⁻¹u₂, −u₂)`.
    pub phi_v: Vector,
}

pub fn closed_form_v(blocks: &ReturnMapBlocks, u2: &Vector) -> Result<ClosedFormV> {
    let n = blocks.n();
    if u2.len() != n {
        return Err(Error::DimensionMismatch(format!("u2 has length {}, expected {n}", u2.len())));
    }
    let c_inv = inverse_guarded(&blocks.c).map_err(|_| Error::CSingular {
        det: blocks.c.determinant(),
    })?;
    let w = (&blocks.a - Matrix::identity(n, n)) * c_inv * u2;
    let mut v = Vector::zeros(2 * n);
    let mut phi_v = Vector::zeros(2 * n);
    v.rows_mut(0, n).copy_from(&w);
    v.rows_mut(n, n).copy_from(&(-u2));
    phi_v.rows_mut(0, n).copy_from(&(-&w));
    phi_v.rows_mut(n, n).copy_from(&(-u2));
    Ok(ClosedFormV { v, phi_v })
}

/// Largest entry gap between two matrices, for oracle comparisons.
pub fn entry_gap(a: &Matrix, b: &Matrix) -> f64 {
    max_abs(&(a - b))
}
