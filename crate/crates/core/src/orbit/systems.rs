//! Sample Hamiltonian systems with a linear antisymplectic involution, and
//! parsers for the command-line descriptions of systems and seed points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{inf_norm, standard_j, Matrix, Vector};

/// A Hamiltonian on `ℝ²ⁿ⁺²` with `X_H = J∇H` and a linear involution `ρ`
/// satisfying `ρ² = I`, `ρᵀJρ = −J` and `H ∘ ρ = H`.
pub trait HamiltonianSystem: Send + Sync {
    fn dim(&self) -> usize;
    fn hamiltonian(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn hessian(&self, x: &Vector) -> Matrix;
    fn involution(&self) -> Matrix;
    /// Energy that orbit searches should land on; `None` keeps the seed's.
    fn energy_level(&self) -> Option<f64> {
        None
    }
    fn name(&self) -> String;

    fn vector_field(&self, x: &Vector) -> Vector {
        standard_j(self.dim() / 2) * self.gradient(x)
    }
}

/// Largest `|H(ρx) − H(x)|` and `‖ρX_H(ρx) + X_H(x)‖∞` over random points in
/// the box `[-scale, scale]^dim`, plus the algebraic involution residuals.
pub fn invariant_residual(sys: &dyn HamiltonianSystem, seed: u64, samples: usize, scale: f64) -> f64 {
    let dim = sys.dim();
    let rho = sys.involution();
    let j = standard_j(dim / 2);
    let mut worst = inf_norm(&(&rho * &rho - Matrix::identity(dim, dim)))
        .max(inf_norm(&(rho.transpose() * &j * &rho + &j)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = Vector::from_fn(dim, |_, _| rng.random_range(-scale..=scale));
        let rx = &rho * &x;
        worst = worst.max((sys.hamiltonian(&rx) - sys.hamiltonian(&x)).abs());
        let field = &rho * sys.vector_field(&rx) + sys.vector_field(&x);
        worst = worst.max(field.amax());
    }
    worst
}

/// `H = ½(p₁² + p₂²) + ½(ω₁²q₁² + ω₂²q₂²)` with `ρ(q₁,q₂,p₁,p₂) = (q₁,−q₂,−p₁,p₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropicOscillator {
    pub w1: f64,
    pub w2: f64,
}

impl HamiltonianSystem for AnisotropicOscillator {
    fn dim(&self) -> usize {
        4
    }
    fn hamiltonian(&self, x: &Vector) -> f64 {
        0.5 * (x[2] * x[2] + x[3] * x[3]) + 0.5 * (self.w1.powi(2) * x[0] * x[0] + self.w2.powi(2) * x[1] * x[1])
    }
    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_vec(vec![self.w1.powi(2) * x[0], self.w2.powi(2) * x[1], x[2], x[3]])
    }
    fn hessian(&self, _x: &Vector) -> Matrix {
        Matrix::from_diagonal(&Vector::from_vec(vec![self.w1.powi(2), self.w2.powi(2), 1.0, 1.0]))
    }
    fn involution(&self) -> Matrix {
        Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -1.0, -1.0, 1.0]))
    }
    fn name(&self) -> String {
        format!("oscillator:{}:{}", self.w1, self.w2)
    }
}

/// `H = ½(p_x² + p_y²) + ½(x² + y²) + x²y − y³/3` with
/// `ρ(x,y,p_x,p_y) = (−x,y,p_x,−p_y)`, at a prescribed energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenonHeiles {
    pub energy: f64,
}

impl HamiltonianSystem for HenonHeiles {
    fn dim(&self) -> usize {
        4
    }
    fn hamiltonian(&self, s: &Vector) -> f64 {
        let (x, y, px, py) = (s[0], s[1], s[2], s[3]);
        0.5 * (px * px + py * py) + 0.5 * (x * x + y * y) + x * x * y - y * y * y / 3.0
    }
    fn gradient(&self, s: &Vector) -> Vector {
        let (x, y, px, py) = (s[0], s[1], s[2], s[3]);
        Vector::from_vec(vec![x + 2.0 * x * y, y + x * x - y * y, px, py])
    }
    fn hessian(&self, s: &Vector) -> Matrix {
        let (x, y) = (s[0], s[1]);
        Matrix::from_row_slice(
            4,
            4,
            &[
                1.0 + 2.0 * y, 2.0 * x, 0.0, 0.0,
                2.0 * x, 1.0 - 2.0 * y, 0.0, 0.0,
                0.0, 0.0, 1.0, 0.0,
                0.0, 0.0, 0.0, 1.0,
            ],
        )
    }
    fn involution(&self) -> Matrix {
        Matrix::from_diagonal(&Vector::from_vec(vec![-1.0, 1.0, 1.0, -1.0]))
    }
    fn energy_level(&self) -> Option<f64> {
        Some(self.energy)
    }
    fn name(&self) -> String {
        format!("henon-heiles:{}", self.energy)
    }
}

fn parse_number(field: &str, what: &str) -> Result<f64> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::MalformedInput(format!("{what}: '{field}' is not a number")))?;
    if !value.is_finite() {
        return Err(Error::MalformedInput(format!("{what}: '{field}' is not finite")));
    }
    Ok(value)
}

/// `oscillator:ω₁:ω₂` (positive frequencies) or `henon-heiles:E`
/// (`0 < E < 1/6`, the bounded regime).
pub fn parse_system_spec(spec: &str) -> Result<Box<dyn HamiltonianSystem>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["oscillator", w1, w2] => {
            let w1 = parse_number(w1, "omega1")?;
            let w2 = parse_number(w2, "omega2")?;
            if w1 <= 0.0 || w2 <= 0.0 {
                return Err(Error::MalformedInput("oscillator frequencies must be positive".into()));
            }
            Ok(Box::new(AnisotropicOscillator { w1, w2 }))
        }
        ["henon-heiles", e] => {
            let energy = parse_number(e, "energy")?;
            if !(energy > 0.0 && energy < 1.0 / 6.0) {
                return Err(Error::MalformedInput(format!(
                    "energy {energy} outside the bounded range (0, 1/6)"
                )));
            }
            Ok(Box::new(HenonHeiles { energy }))
        }
        ["oscillator", ..] => Err(Error::MalformedInput("expected oscillator:<omega1>:<omega2>".into())),
        ["henon-heiles", ..] => Err(Error::MalformedInput("expected henon-heiles:<energy>".into())),
        _ => Err(Error::MalformedInput(format!(
            "unknown system '{spec}' (expected oscillator:<w1>:<w2> or henon-heiles:<energy>)"
        ))),
    }
}

/// A JSON array of `dim` finite numbers.
pub fn parse_seed_point(json: &str, dim: usize) -> Result<Vector> {
    let values: Vec<f64> = serde_json::from_str(json).map_err(|e| {
        Error::MalformedInput(format!("seed point at line {}, column {}: {e}", e.line(), e.column()))
    })?;
    if values.len() != dim {
        return Err(Error::MalformedInput(format!(
            "seed point has {} coordinates, the system needs {dim}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::MalformedInput("seed point has non-finite coordinates".into()));
    }
    Ok(Vector::from_vec(values))
}
