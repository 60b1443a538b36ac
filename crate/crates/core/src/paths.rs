//! Explicit symplectic paths from the identity to a given matrix.
//!
//! A symplectic `Φ` is rotated so its upper-left block is well conditioned,
//! then factored as
//!
//! ```text
//! Φ = Rot(θ) · Lower(S) · Diag(Q) · Diag(P₊) · Upper(P)
//! ```
//!
//! with `S`, `P` symmetric, `Q` orthogonal and `P₊` positive definite. Every
//! factor has an obvious path to `I` (angles scaled by `t`, symmetric parts
//! scaled by `t`, `P₊ᵗ`, Givens angles scaled by `t`). The product is
//! multiplied by a seeded Cayley loop `t ↦ cay(sin(πt) Y)`, which leaves the
//! endpoints fixed but moves crossings into general position.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{assemble_blocks, check_square, inf_norm, max_abs, singular_values, split_blocks, standard_j, svd, Matrix};
use crate::maslov::SymplecticPath;

/// `[[cos θ I, −sin θ I], [sin θ I, cos θ I]]`.
pub fn rotation(n: usize, theta: f64) -> Matrix {
    let id = Matrix::identity(n, n);
    let (s, c) = theta.sin_cos();
    assemble_blocks(&(&id * c), &(&id * -s), &(&id * s), &(&id * c))
}

fn upper(p: &Matrix) -> Matrix {
    let n = p.nrows();
    assemble_blocks(&Matrix::identity(n, n), p, &Matrix::zeros(n, n), &Matrix::identity(n, n))
}

fn lower(s: &Matrix) -> Matrix {
    let n = s.nrows();
    assemble_blocks(&Matrix::identity(n, n), &Matrix::zeros(n, n), s, &Matrix::identity(n, n))
}

/// `diag(G, G⁻ᵀ)` given `G` and `G⁻ᵀ`.
fn diag(g: &Matrix, g_inv_t: &Matrix) -> Matrix {
    let n = g.nrows();
    assemble_blocks(g, &Matrix::zeros(n, n), &Matrix::zeros(n, n), g_inv_t)
}

/// Rotation by `φ` in the `(p, q)` coordinate plane.
fn givens(n: usize, p: usize, q: usize, phi: f64) -> Matrix {
    let mut g = Matrix::identity(n, n);
    let (s, c) = phi.sin_cos();
    g[(p, p)] = c;
    g[(p, q)] = -s;
    g[(q, p)] = s;
    g[(q, q)] = c;
    g
}

/// `Q = Π G(pᵢ, qᵢ, φᵢ) · diag(1, …, 1, ±1)`.
struct GivensFactors {
    n: usize,
    rotations: Vec<(usize, usize, f64)>,
    flip: bool,
}

impl GivensFactors {
    fn new(q: &Matrix) -> Self {
        let n = q.nrows();
        let mut r = q.clone();
        let mut rotations = Vec::new();
        for j in 0..n {
            for i in (j + 1..n).rev() {
                let (x_p, x_q) = (r[(i - 1, j)], r[(i, j)]);
                if x_q == 0.0 {
                    continue;
                }
                let phi = (-x_q).atan2(x_p);
                r = givens(n, i - 1, i, phi) * r;
                rotations.push((i - 1, i, -phi));
            }
        }
        GivensFactors { n, rotations, flip: n > 0 && r[(n - 1, n - 1)] < 0.0 }
    }

    fn eval(&self, t: f64) -> Matrix {
        let mut m = Matrix::identity(self.n, self.n);
        for &(p, q, phi) in &self.rotations {
            m *= givens(self.n, p, q, t * phi);
        }
        m
    }
}

/// Rotation by `tπ` in the `(q_n, p_n)` plane; equals `diag(D, D)` at `t = 1`
/// for `D = diag(1, …, 1, −1)`.
fn flip_path(n: usize, t: f64) -> Matrix {
    let mut m = Matrix::identity(2 * n, 2 * n);
    let (s, c) = (std::f64::consts::PI * t).sin_cos();
    let (a, b) = (n - 1, 2 * n - 1);
    m[(a, a)] = c;
    m[(a, b)] = -s;
    m[(b, a)] = s;
    m[(b, b)] = c;
    m
}

/// `cay(X) = (I − X/2)⁻¹ (I + X/2)`; symplectic for Hamiltonian `X`.
fn cayley(x: &Matrix) -> Matrix {
    let id = Matrix::identity(x.nrows(), x.ncols());
    let half = x * 0.5;
    (&id - &half).lu().solve(&(&id + &half)).expect("cayley argument is small")
}

/// A random Hamiltonian `Y = J·Sym` of norm 0.2–0.6, for `t ↦ cay(sin(πt) Y)`.
fn random_loop_generator(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let noise = Matrix::from_fn(2 * n, 2 * n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let amplitude: f64 = rng.random_range(0.2..0.6);
    let y = standard_j(n) * ((&noise + noise.transpose()) * 0.5);
    &y * (amplitude / inf_norm(&y).max(1e-12))
}

/// Largest accepted condition number of the rotated upper-left block.
const ROTATION_COND: f64 = 1e3;

/// A seeded path from `I` to the symplectic matrix `phi`.
pub fn path_to(phi: &Matrix, seed: u64) -> Result<SymplecticPath> {
    let dim = check_square(phi)?;
    if dim % 2 != 0 || dim == 0 {
        return Err(Error::OddDimension(dim));
    }
    let n = dim / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b, c, d) = split_blocks(phi)?;

    let mut best: Option<(f64, f64)> = None;
    for _ in 0..64 {
        let theta: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let (s, co) = theta.sin_cos();
        let g = &a * co + &c * s;
        let sv = singular_values(&g);
        let cond = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };
        if best.is_none_or(|(_, bc)| cond < bc) {
            best = Some((theta, cond));
        }
        if cond <= ROTATION_COND {
            break;
        }
    }
    let (theta, cond) = best.expect("at least one candidate");
    if !cond.is_finite() || cond > 1e10 {
        return Err(Error::IllConditioned { cond });
    }
    let (s, co) = theta.sin_cos();
    let a1 = &a * co + &c * s;
    let b1 = &b * co + &d * s;
    let c1 = &c * co - &a * s;
    let g_inv = a1.clone().try_inverse().ok_or(Error::IllConditioned { cond })?;
    let sym = |m: Matrix| (&m + m.transpose()) * 0.5;
    let p = sym(&g_inv * &b1);
    let s_low = sym(&c1 * &g_inv);

    // Polar factors A₁ = Q P₊ from the SVD A₁ = U Σ Vᵀ.
    let d = svd(&a1);
    let v_t = d.v.transpose();
    let sigma = d.singular_values;
    let q = &d.u * &v_t;
    let givens = GivensFactors::new(&q);
    let flip = givens.flip;
    let y = random_loop_generator(&mut rng, n);

    let evaluator = move |t: f64| -> Matrix {
        let v = v_t.transpose();
        let pow = Matrix::from_diagonal(&sigma.map(|x| x.powf(t)));
        let pow_inv = Matrix::from_diagonal(&sigma.map(|x| x.powf(-t)));
        let pos = &v * pow * &v_t;
        let pos_inv = &v * pow_inv * &v_t;
        let qt = givens.eval(t);
        let mut m = cayley(&(&y * (std::f64::consts::PI * t).sin()));
        m *= rotation(n, t * theta);
        m *= lower(&(&s_low * t));
        m *= diag(&qt, &qt);
        if flip {
            m *= flip_path(n, t);
        }
        m *= diag(&pos, &pos_inv);
        m *= upper(&(&p * t));
        m
    };
    let path = SymplecticPath::new(dim, evaluator)?;
    let gap = max_abs(&(path.end() - phi));
    if gap > 1e-8 * inf_norm(phi).max(1.0).powi(2) {
        return Err(Error::IllConditioned { cond });
    }
    Ok(path)
}

/// A seeded path from `I` to `Φᵏ` through the iterates: `Ψ(kt − j) Φʲ` on
/// the `j`-th of `k` equal pieces, where `Ψ` runs from `I` to `Φ`, times an
/// outer Cayley loop that keeps crossings off the junctions.
///
/// For large `k` this avoids factoring `Φᵏ` itself, whose small singular
/// directions are lost to rounding long before its graph is.
pub fn iterate_path_to(phi: &Matrix, k: usize, seed: u64) -> Result<SymplecticPath> {
    if k == 0 {
        return Err(Error::MalformedInput("iterate index starts at 1".into()));
    }
    if k == 1 {
        return path_to(phi, seed);
    }
    let dim = check_square(phi)?;
    let base = path_to(phi, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_17e7a7e5);
    let y = random_loop_generator(&mut rng, dim / 2);
    let mut powers = vec![Matrix::identity(dim, dim)];
    for j in 1..k {
        powers.push(&powers[j - 1] * phi);
    }
    let kf = k as f64;
    SymplecticPath::new(dim, move |t: f64| {
        let j = ((t * kf).floor() as usize).min(k - 1);
        let local = t * kf - j as f64;
        cayley(&(&y * (std::f64::consts::PI * t).sin())) * base.eval(local) * &powers[j]
    })
}
