//! Dense real-matrix utilities for the symplectic computations.
//!
//! The standard structure matrix on ℝⁿ×ℝⁿ is `J = [[0, I], [-I, 0]]`, so
//! `ω(x, y) = xᵀ J y = ⟨x₁, y₂⟩ − ⟨x₂, y₁⟩`. Every module in the crate uses
//! this convention.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::darwin::ReturnMapBlocks;
use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest condition estimate a guarded solve accepts.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative zero threshold used when the caller does not pick one.
pub const DEFAULT_ZERO_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Inertia {
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_zero: usize,
}

impl Inertia {
    pub fn signature(&self) -> i64 {
        self.n_pos as i64 - self.n_neg as i64
    }

    pub fn dim(&self) -> usize {
        self.n_pos + self.n_neg + self.n_zero
    }
}

/// Row-sum (∞-operator) norm.
pub fn inf_norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest absolute entry.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn check_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn check_square(m: &Matrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Default zero threshold: `1e-8 · ‖M‖∞`.
pub fn default_zero_tol(m: &Matrix) -> f64 {
    DEFAULT_ZERO_REL_TOL * inf_norm(m)
}

/// Eigenvalue counts of `(M + Mᵀ)/2` above `tol`, below `-tol`, and in between.
pub fn inertia(m: &Matrix, tol: f64) -> Result<Inertia> {
    let n = check_square(m)?;
    check_finite(m)?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut out = Inertia { n_pos: 0, n_neg: 0, n_zero: 0 };
    for &lambda in eig.eigenvalues.iter() {
        if lambda > tol {
            out.n_pos += 1;
        } else if lambda < -tol {
            out.n_neg += 1;
        } else {
            out.n_zero += 1;
        }
    }
    debug_assert_eq!(out.dim(), n);
    Ok(out)
}

/// Signature of a nondegenerate symmetric form.
pub fn signature(m: &Matrix, tol: f64) -> Result<i64> {
    let inertia = inertia(m, tol)?;
    if inertia.n_zero > 0 {
        return Err(Error::DegenerateForm { n_zero: inertia.n_zero, tol });
    }
    Ok(inertia.signature())
}

/// The structure matrix `[[0, I], [-I, 0]]` of size `2n`.
pub fn standard_j(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// The involution `diag(I, -I)` of size `2n`.
pub fn reflection_r(n: usize) -> Matrix {
    let mut r = Matrix::identity(2 * n, 2 * n);
    for i in n..2 * n {
        r[(i, i)] = -1.0;
    }
    r
}

/// `‖ΦᵀJΦ − J‖∞`.
pub fn symplectic_residual(phi: &Matrix) -> Result<f64> {
    let dim = check_square(phi)?;
    if dim % 2 != 0 {
        return Err(Error::OddDimension(dim));
    }
    let j = standard_j(dim / 2);
    Ok(inf_norm(&(phi.transpose() * &j * phi - j)))
}

pub fn is_symplectic(phi: &Matrix, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(phi)? <= tol)
}

/// Inverse of a symplectic map from its blocks: `(Dᵀ, −Bᵀ, −Cᵀ, Aᵀ)`.
///
/// `rel_tol` is scaled by `max(1, ‖Φ‖∞)²` before the symplecticity check.
pub fn symplectic_inverse(blocks: &ReturnMapBlocks, rel_tol: f64) -> Result<ReturnMapBlocks> {
    let phi = blocks.assemble();
    let residual = symplectic_residual(&phi)?;
    let tol = rel_tol * inf_norm(&phi).max(1.0).powi(2);
    if residual > tol {
        return Err(Error::NotSymplectic { residual, tol });
    }
    Ok(ReturnMapBlocks {
        a: blocks.d.transpose(),
        b: -blocks.b.transpose(),
        c: -blocks.c.transpose(),
        d: blocks.a.transpose(),
    })
}

/// `‖M‖∞ · ‖M⁻¹‖∞`, or infinity when the LU factorization is singular.
pub fn condition_estimate(m: &Matrix) -> f64 {
    match m.clone().lu().try_inverse() {
        Some(inv) => inf_norm(m) * inf_norm(&inv),
        None => f64::INFINITY,
    }
}

/// Partial-pivot LU solve of `M X = rhs`, refusing ill-conditioned systems.
pub fn solve_guarded(m: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let n = check_square(m)?;
    if rhs.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "system is {n}x{n} but right-hand side has {} rows",
            rhs.nrows()
        )));
    }
    check_finite(m)?;
    let lu = m.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    let cond = inf_norm(m) * inf_norm(&inv);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned { cond });
    }
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or(Error::IllConditioned { cond: f64::INFINITY })
}

pub fn inverse_guarded(m: &Matrix) -> Result<Matrix> {
    let n = check_square(m)?;
    solve_guarded(m, &Matrix::identity(n, n))
}

/// Thin QR orthonormalization with a positive diagonal in R, so the frame
/// depends continuously on its input.
pub fn orthonormal_frame(m: &Matrix) -> Matrix {
    let cols = m.ncols();
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Thin singular value decomposition `M = U Σ Vᵀ`, singular values descending.
///
/// Columns of `U` belonging to zero singular values are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vector,
    pub v: Matrix,
}

impl Svd {
    /// Least-squares solution of `M x = b`, ignoring singular values at or
    /// below `cutoff`.
    pub fn solve(&self, b: &Vector, cutoff: f64) -> Vector {
        let mut x = Vector::zeros(self.v.nrows());
        for (i, &s) in self.singular_values.iter().enumerate() {
            if s > cutoff {
                x += self.v.column(i) * (self.u.column(i).dot(b) / s);
            }
        }
        x
    }
}

const JACOBI_SWEEPS: usize = 80;

/// Rotates columns `p < q` of the column-major `data` (columns of length
/// `len`) by `(c, s)`.
fn rotate_columns(data: &mut [f64], len: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = data.split_at_mut(q * len);
    let col_p = &mut head[p * len..(p + 1) * len];
    let col_q = &mut tail[..len];
    for (x, y) in col_p.iter_mut().zip(col_q.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Orthogonalizes the columns of `w` in place, applying the same rotations
/// to `v` when given.
fn jacobi_orthogonalize(w: &mut Matrix, mut v: Option<&mut Matrix>) {
    let (rows, cols) = w.shape();
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let data = w.as_slice();
                let (col_p, col_q) = (&data[p * rows..(p + 1) * rows], &data[q * rows..(q + 1) * rows]);
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for (x, y) in col_p.iter().zip(col_q) {
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(w.as_mut_slice(), rows, p, q, c, s);
                if let Some(v) = v.as_deref_mut() {
                    rotate_columns(v.as_mut_slice(), cols, p, q, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

fn padded_square(m: &Matrix) -> Matrix {
    let (rows, cols) = m.shape();
    if rows < cols {
        let mut p = Matrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    }
}

/// One-sided Jacobi SVD. Slower than bidiagonalization for large matrices,
/// but accurate to high relative precision on the small dense blocks used
/// here, and it always converges to a consistent factorization (the
/// bidiagonal routine occasionally returns factors that miss `M` by far more
/// than rounding).
pub fn svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let mut w = padded_square(m);
    let mut v = Matrix::identity(cols, cols);
    jacobi_orthogonalize(&mut w, Some(&mut v));
    let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = Matrix::zeros(rows, cols);
    let mut vs = Matrix::zeros(cols, cols);
    let mut sv = Vector::zeros(cols);
    for (out, &j) in order.iter().enumerate() {
        sv[out] = norms[j];
        vs.set_column(out, &v.column(j));
        if norms[j] > 0.0 {
            u.set_column(out, &(w.column(j).rows(0, rows) / norms[j]));
        }
    }
    Svd { u, singular_values: sv, v: vs }
}

/// Singular values, descending.
pub fn singular_values(m: &Matrix) -> Vector {
    let mut w = padded_square(m);
    jacobi_orthogonalize(&mut w, None);
    let mut norms: Vec<f64> = (0..w.ncols()).map(|j| w.column(j).norm()).collect();
    norms.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Vector::from_vec(norms)
}

/// Orthonormal basis of `{x : M x ≈ 0}` from the right singular vectors whose
/// singular values are at most `tol`.
pub fn null_space(m: &Matrix, tol: f64) -> Matrix {
    let d = svd(m);
    let picked: Vec<usize> = (0..d.singular_values.len()).filter(|&i| d.singular_values[i] <= tol).collect();
    let mut basis = Matrix::zeros(m.ncols(), picked.len());
    for (out, &i) in picked.iter().enumerate() {
        basis.set_column(out, &d.v.column(i));
    }
    basis
}

/// Singular values sorted ascending.
pub fn singular_values_ascending(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = singular_values(m).iter().copied().collect();
    s.reverse();
    s
}

/// Splits a `2n×2n` matrix into its four `n×n` blocks.
pub fn split_blocks(phi: &Matrix) -> Result<(Matrix, Matrix, Matrix, Matrix)> {
    let dim = check_square(phi)?;
    if dim % 2 != 0 {
        return Err(Error::OddDimension(dim));
    }
    let n = dim / 2;
    Ok((
        phi.view((0, 0), (n, n)).into_owned(),
        phi.view((0, n), (n, n)).into_owned(),
        phi.view((n, 0), (n, n)).into_owned(),
        phi.view((n, n), (n, n)).into_owned(),
    ))
}

pub fn assemble_blocks(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
    let n = a.nrows();
    let mut phi = Matrix::zeros(2 * n, 2 * n);
    phi.view_mut((0, 0), (n, n)).copy_from(a);
    phi.view_mut((0, n), (n, n)).copy_from(b);
    phi.view_mut((n, 0), (n, n)).copy_from(c);
    phi.view_mut((n, n), (n, n)).copy_from(d);
    phi
}

/// Block-diagonal `diag(m1, m2)`.
pub fn block_diag(m1: &Matrix, m2: &Matrix) -> Matrix {
    let (r1, c1) = m1.shape();
    let (r2, c2) = m2.shape();
    let mut out = Matrix::zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(m1);
    out.view_mut((r1, c1), (r2, c2)).copy_from(m2);
    out
}

/// `Φᵏ` by repeated multiplication.
pub fn matrix_power(m: &Matrix, k: usize) -> Matrix {
    let n = m.nrows();
    let mut out = Matrix::identity(n, n);
    for _ in 0..k {
        out = &out * m;
    }
    out
}
