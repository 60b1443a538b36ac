//! Symmetric return maps: block types, identity checks, random generation
//! and nondegeneracy.
//!
//! A return map `Φ = [[A, B], [C, D]]` of a symmetric orbit satisfies
//! `D = Aᵀ`, `B = Bᵀ`, `C = Cᵀ`, `AB = BAᵀ`, `CA = AᵀC`, `A² − BC = I`,
//! equivalently `Φ` is symplectic and `Φ = RΦ⁻¹R` with `R = diag(I, −I)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    assemble_blocks, inf_norm, matrix_power, reflection_r, split_blocks, standard_j,
    symplectic_residual, Matrix,
};

/// The four `n×n` blocks of a `2n×2n` map.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMapBlocks {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

impl ReturnMapBlocks {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.nrows();
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "block {name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if n == 0 {
            return Err(Error::DimensionMismatch("blocks must be at least 1x1".into()));
        }
        Ok(ReturnMapBlocks { a, b, c, d })
    }

    pub fn from_matrix(phi: &Matrix) -> Result<Self> {
        let (a, b, c, d) = split_blocks(phi)?;
        ReturnMapBlocks::new(a, b, c, d)
    }

    pub fn identity(n: usize) -> Self {
        ReturnMapBlocks {
            a: Matrix::identity(n, n),
            b: Matrix::zeros(n, n),
            c: Matrix::zeros(n, n),
            d: Matrix::identity(n, n),
        }
    }

    /// `n = 1` blocks from four scalars.
    pub fn scalar(a: f64, b: f64, c: f64, d: f64) -> Self {
        let s = |x| Matrix::from_element(1, 1, x);
        ReturnMapBlocks { a: s(a), b: s(b), c: s(c), d: s(d) }
    }

    /// `n = 1` blocks of the rotation by `theta`: `(cos θ, −sin θ, sin θ, cos θ)`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        ReturnMapBlocks::scalar(c, -s, s, c)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn assemble(&self) -> Matrix {
        assemble_blocks(&self.a, &self.b, &self.c, &self.d)
    }

    pub fn is_finite(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .all(|m| m.iter().all(|x| x.is_finite()))
    }
}

/// `‖·‖∞` residual of each return-map identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarwinResiduals {
    pub d_eq_a_transpose: f64,
    pub b_symmetric: f64,
    pub c_symmetric: f64,
    pub ab_eq_b_a_transpose: f64,
    pub ca_eq_a_transpose_c: f64,
    pub a_squared_minus_bc_eq_identity: f64,
    pub symplectic: f64,
}

impl DarwinResiduals {
    pub fn max(&self) -> f64 {
        [
            self.d_eq_a_transpose,
            self.b_symmetric,
            self.c_symmetric,
            self.ab_eq_b_a_transpose,
            self.ca_eq_a_transpose_c,
            self.a_squared_minus_bc_eq_identity,
            self.symplectic,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarwinReport {
    pub residuals: DarwinResiduals,
    pub tol: f64,
    pub passes: bool,
}

pub fn validate_darwin(blocks: &ReturnMapBlocks, tol: f64) -> Result<DarwinReport> {
    let ReturnMapBlocks { a, b, c, d } = blocks;
    let n = a.nrows();
    if [b, c, d].iter().any(|m| m.shape() != (n, n)) || a.ncols() != n {
        return Err(Error::DimensionMismatch("blocks must be square and of equal size".into()));
    }
    let at = a.transpose();
    let residuals = DarwinResiduals {
        d_eq_a_transpose: inf_norm(&(d - &at)),
        b_symmetric: inf_norm(&(b - b.transpose())),
        c_symmetric: inf_norm(&(c - c.transpose())),
        ab_eq_b_a_transpose: inf_norm(&(a * b - b * &at)),
        ca_eq_a_transpose_c: inf_norm(&(c * a - &at * c)),
        a_squared_minus_bc_eq_identity: inf_norm(&(a * a - b * c - Matrix::identity(n, n))),
        symplectic: symplectic_residual(&blocks.assemble())?,
    };
    Ok(DarwinReport { residuals, tol, passes: residuals.max() <= tol })
}

/// A random symplectic matrix `diag(G, G⁻ᵀ) · [[I, S₁], [0, I]] · [[I, 0], [S₂, I]]`.
///
/// `S₁`, `S₂` are symmetric with entries in `[-scale, scale]`; `G = Q·diag(eᵘ)`
/// with `Q` orthogonal and `u ∈ [-scale/2, scale/2]`.
pub fn random_symplectic(n: usize, seed: u64, scale: f64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sym = |rng: &mut ChaCha8Rng| {
        let mut s = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = rng.random_range(-scale..=scale);
                s[(i, j)] = x;
                s[(j, i)] = x;
            }
        }
        s
    };
    let s1 = sym(&mut rng);
    let s2 = sym(&mut rng);
    let gauss = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = crate::linalg::orthonormal_frame(&gauss);
    let stretch = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            rng.random_range(-0.5 * scale..=0.5 * scale).exp()
        } else {
            0.0
        }
    });
    let g = &q * &stretch;
    let g_inv_t = &q * stretch.map(|x| if x != 0.0 { 1.0 / x } else { 0.0 });
    let id = Matrix::identity(n, n);
    let zero = Matrix::zeros(n, n);
    let diag = assemble_blocks(&g, &zero, &zero, &g_inv_t);
    let upper = assemble_blocks(&id, &s1, &zero, &id);
    let lower = assemble_blocks(&id, &zero, &s2, &id);
    diag * upper * lower
}

/// `W⁻¹ = −J Wᵀ J` for symplectic `W`.
pub(crate) fn symplectic_inverse_matrix(w: &Matrix) -> Matrix {
    let j = standard_j(w.nrows() / 2);
    -(&j * w.transpose() * &j)
}

/// `Φ = (R W⁻¹ R) W` for a seeded random symplectic `W`.
pub fn random_return_map(n: usize, seed: u64, scale: f64) -> ReturnMapBlocks {
    let w = random_symplectic(n, seed, scale);
    return_map_from(&w)
}

/// `Φ = (R W⁻¹ R) W`; symplectic and `R`-reversible for any symplectic `W`.
pub fn return_map_from(w: &Matrix) -> ReturnMapBlocks {
    let r = reflection_r(w.nrows() / 2);
    let phi = &r * symplectic_inverse_matrix(w) * &r * w;
    ReturnMapBlocks::from_matrix(&phi).expect("even square matrix")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub k_max: usize,
    /// `det(Φᵏ − I)` for `k = 1..=k_max`.
    pub det_values: Vec<f64>,
    /// Threshold applied at each `k`.
    pub thresholds: Vec<f64>,
    /// Iterates with `|det(Φᵏ − I)|` at or below threshold.
    pub degenerate: Vec<usize>,
    pub ok: bool,
    pub c_det: f64,
    pub c_invertible: bool,
    /// Iterates 1 and 2 are nondegenerate yet `C` is numerically singular.
    pub invert_inconsistency: bool,
}

impl NondegeneracyReport {
    pub fn is_nondegenerate(&self, k: usize) -> bool {
        k >= 1 && k <= self.k_max && !self.degenerate.contains(&k)
    }
}

/// Default threshold `1e-10 · max(1, ‖Φ‖∞ᵏ)`.
pub fn default_det_threshold(phi_norm: f64, k: usize) -> f64 {
    1e-10 * phi_norm.powi(k as i32).max(1.0)
}

pub fn nondegeneracy_check(
    blocks: &ReturnMapBlocks,
    k_max: usize,
    threshold: Option<f64>,
) -> NondegeneracyReport {
    let phi = blocks.assemble();
    let norm = inf_norm(&phi);
    let dim = phi.nrows();
    let id = Matrix::identity(dim, dim);
    let mut power = id.clone();
    let mut det_values = Vec::with_capacity(k_max);
    let mut thresholds = Vec::with_capacity(k_max);
    let mut degenerate = Vec::new();
    for k in 1..=k_max {
        power = &power * &phi;
        let det = (&power - &id).determinant();
        let thr = threshold.unwrap_or_else(|| default_det_threshold(norm, k));
        if !(det.abs() > thr) {
            degenerate.push(k);
        }
        det_values.push(det);
        thresholds.push(thr);
    }
    let c_det = blocks.c.determinant();
    let c_thr = threshold.unwrap_or_else(|| default_det_threshold(norm, 1));
    let c_invertible = c_det.abs() > c_thr;
    let first_two_ok = k_max >= 2 && !degenerate.contains(&1) && !degenerate.contains(&2);
    NondegeneracyReport {
        k_max,
        det_values,
        thresholds,
        ok: degenerate.is_empty(),
        degenerate,
        c_det,
        c_invertible,
        invert_inconsistency: first_two_ok && !c_invertible,
    }
}

/// `Φᵏ` blocks by repeated multiplication.
pub fn power_blocks(blocks: &ReturnMapBlocks, k: usize) -> ReturnMapBlocks {
    ReturnMapBlocks::from_matrix(&matrix_power(&blocks.assemble(), k)).expect("even square")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlocksDoc {
    n: Option<i64>,
    #[serde(rename = "A")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B")]
    b: Option<Vec<Vec<f64>>>,
    #[serde(rename = "C")]
    c: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D")]
    d: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Phi")]
    phi: Option<Vec<Vec<f64>>>,
    /// Schema version; accepted and ignored.
    v: Option<i64>,
}

fn rows_to_matrix(field: &str, rows: &[Vec<f64>], size: usize) -> Result<Matrix> {
    if rows.len() != size {
        return Err(Error::MalformedInput(format!(
            "field \"{field}\": expected {size} rows, found {}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != size {
            return Err(Error::MalformedInput(format!(
                "field \"{field}\" row {i}: expected {size} entries, found {}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(Error::MalformedInput(format!(
                "field \"{field}\" row {i} column {j}: non-finite entry"
            )));
        }
    }
    Ok(Matrix::from_fn(size, size, |i, j| rows[i][j]))
}

/// Upper bound on `n` accepted from documents.
pub const MAX_DOCUMENT_N: usize = 64;

/// Parses `{"n", "A", "B", "C", "D"}` or `{"n", "Phi"}` (row-major).
///
/// Only the shape is checked here; callers run [`validate_darwin`].
pub fn parse_blocks_json(text: &str) -> Result<ReturnMapBlocks> {
    let doc: BlocksDoc = serde_json::from_str(text).map_err(|e| {
        Error::MalformedInput(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    let n = doc.n.ok_or_else(|| Error::MalformedInput("missing field \"n\"".into()))?;
    if n < 1 || n as usize > MAX_DOCUMENT_N {
        return Err(Error::MalformedInput(format!(
            "field \"n\": expected 1..={MAX_DOCUMENT_N}, found {n}"
        )));
    }
    let n = n as usize;
    let have_blocks = [&doc.a, &doc.b, &doc.c, &doc.d].iter().any(|x| x.is_some());
    match (&doc.phi, have_blocks) {
        (Some(_), true) => Err(Error::MalformedInput(
            "give either \"Phi\" or the blocks \"A\",\"B\",\"C\",\"D\", not both".into(),
        )),
        (Some(rows), false) => {
            let phi = rows_to_matrix("Phi", rows, 2 * n)?;
            ReturnMapBlocks::from_matrix(&phi)
        }
        (None, _) => {
            let get = |field: &str, m: &Option<Vec<Vec<f64>>>| {
                m.as_ref()
                    .ok_or_else(|| Error::MalformedInput(format!("missing field \"{field}\"")))
                    .and_then(|rows| rows_to_matrix(field, rows, n))
            };
            ReturnMapBlocks::new(
                get("A", &doc.a)?,
                get("B", &doc.b)?,
                get("C", &doc.c)?,
                get("D", &doc.d)?,
            )
        }
    }
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn blocks_to_json(blocks: &ReturnMapBlocks) -> serde_json::Value {
    serde_json::json!({
        "n": blocks.n(),
        "A": matrix_rows(&blocks.a),
        "B": matrix_rows(&blocks.b),
        "C": matrix_rows(&blocks.c),
        "D": matrix_rows(&blocks.d),
    })
}

impl Serialize for ReturnMapBlocks {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        blocks_to_json(self).serialize(serializer)
    }
}
