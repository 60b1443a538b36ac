//! Chebyshev polynomials of both kinds, scalar and matrix-valued, and the
//! block formula for iterates of a symmetric return map.

use serde::{Deserialize, Serialize};

use crate::darwin::{validate_darwin, ReturnMapBlocks};
use crate::error::{Error, Result};
use crate::linalg::{check_square, inf_norm, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChebKind {
    First,
    Second,
}

/// `T_k(x)` or `U_k(x)` by the three-term recurrence.
pub fn cheb_scalar(kind: ChebKind, k: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    let mut cur = match kind {
        ChebKind::First => x,
        ChebKind::Second => 2.0 * x,
    };
    if k == 0 {
        return prev;
    }
    for _ in 1..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// The recurrence with `x` replaced by `A` and constants by `I`.
pub fn cheb_matrix(kind: ChebKind, k: usize, a: &Matrix) -> Result<Matrix> {
    let n = check_square(a).map_err(|_| {
        Error::DimensionMismatch(format!("matrix argument is {}x{}", a.nrows(), a.ncols()))
    })?;
    let id = Matrix::identity(n, n);
    if k == 0 {
        return Ok(id);
    }
    let two_a = a * 2.0;
    let mut prev = id;
    let mut cur = match kind {
        ChebKind::First => a.clone(),
        ChebKind::Second => two_a.clone(),
    };
    for _ in 1..k {
        let next = &two_a * &cur - &prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `(T_k(A), U_{k-1}(A))` for `k ≥ 1` in one sweep of the recurrence.
pub fn cheb_pair(k: usize, a: &Matrix) -> Result<(Matrix, Matrix)> {
    assert!(k >= 1, "iterate index starts at 1");
    Ok((cheb_matrix(ChebKind::First, k, a)?, cheb_matrix(ChebKind::Second, k - 1, a)?))
}

/// `(cos kα, sin((k+1)α) / sin α)`, the trigonometric values of `T_k` and
/// `U_k` at `cos α`.
pub fn cheb_trig_reference(k: usize, alpha: f64) -> Result<(f64, f64)> {
    let s = alpha.sin();
    if s.abs() < 1e-12 {
        return Err(Error::AlphaDegenerate { sin_alpha: s });
    }
    let kf = k as f64;
    Ok(((kf * alpha).cos(), ((kf + 1.0) * alpha).sin() / s))
}

/// Blocks of `Φᵏ`: `(T_k(A), U_{k−1}(A)B, C U_{k−1}(A), T_k(Aᵀ))`.
///
/// Input blocks are validated at `validation_tol` first.
pub fn iterate_blocks(
    blocks: &ReturnMapBlocks,
    k: usize,
    validation_tol: f64,
) -> Result<ReturnMapBlocks> {
    if k == 0 {
        return Err(Error::InvalidBlocks("iterate index must be at least 1".into()));
    }
    let report = validate_darwin(blocks, validation_tol)?;
    if !report.passes {
        return Err(Error::InvalidBlocks(format!(
            "max identity residual {:e} exceeds {validation_tol:e}",
            report.residuals.max()
        )));
    }
    Ok(iterate_blocks_unchecked(blocks, k))
}

pub(crate) fn iterate_blocks_unchecked(blocks: &ReturnMapBlocks, k: usize) -> ReturnMapBlocks {
    if k == 1 {
        return blocks.clone();
    }
    let (t_k, u_km1) = cheb_pair(k, &blocks.a).expect("square blocks");
    let t_k_transpose = cheb_matrix(ChebKind::First, k, &blocks.a.transpose()).expect("square");
    ReturnMapBlocks {
        b: &u_km1 * &blocks.b,
        c: &blocks.c * &u_km1,
        a: t_k,
        d: t_k_transpose,
    }
}

/// Default tolerance for validating blocks before iterating.
pub fn default_validation_tol(blocks: &ReturnMapBlocks) -> f64 {
    1e-8 * inf_norm(&blocks.assemble()).powi(2).max(1.0)
}
